#pragma once

#include <optional>
#include <utility>

#include "kljn/rng.hpp"
#include "kljn/series.hpp"
#include "kljn/stats.hpp"
#include "kljn/truthtable.hpp"

// Passive eavesdropper models. Eve taps the line and works with the same
// estimators the honest parties use; her handicap is statistics, not
// tooling. All models consume only the first `window` samples of a slot,
// which is how shortening the clock period starves her.

namespace kljn {

struct EveReport {
  std::size_t slot = 0;
  Situation situation_guess = Situation::Mid;
  std::optional<int> bit_guess; // present only when situation_guess is Mid
  double confidence = 0.5;      // in [0, 1]; reporting only
  Eigen::Index observed_window = 0;
  std::optional<std::pair<int, int>> pair_guess; // exact-pair model only
};

// Ideal-wire tap: mean-square classification of the channel against the
// three predicted levels. A secure slot carries no directional information,
// so the bit guess on Mid is a fair coin.
EveReport eve_passive_ideal(const SeriesRef& u_ch, const SeriesRef& i_ch,
                            const LevelTable& levels, Eigen::Index window, RngStream& rng);

// Wire-resistance leak, classic pair only. The line drop makes the two
// endpoint voltages differ,
//   <u_end_a^2> - <u_end_b^2> = 4kT df * r_w^2 (r_a - r_b) / rho^2,
// so the noisier end points at the larger resistor. Confidence comes from
// the estimator's signal-to-noise ratio. With r_w = 0 there is no leak and
// the report degrades to the ideal-tap coin flip at confidence 0.5.
EveReport eve_wire_resistance(const SeriesRef& u_end_a, const SeriesRef& u_end_b,
                              const SeriesRef& i_ch, const ResistorBank& bank,
                              const NoiseParams& params, double r_w, Eigen::Index window,
                              RngStream& rng);

// Maximum-likelihood identification of the ordered resistor pair from the
// endpoint and current mean-squares, over all n^2 candidates. Ties (exact
// at r_w = 0, where the orderings predict identical observables) fall to a
// coin flip between the tied pair. The bit lookup uses `table` when the
// interpretation is public; keyed_table = true models an Eve without the
// prior key, whose bit guess is a coin flip even with the pair identified.
EveReport eve_exact_pair_guess(const SeriesRef& u_end_a, const SeriesRef& u_end_b,
                               const SeriesRef& i_ch, const ResistorBank& bank,
                               const NoiseParams& params, double r_w, bool keyed_table,
                               const TruthTable& table, Eigen::Index window, RngStream& rng);

} // namespace kljn
