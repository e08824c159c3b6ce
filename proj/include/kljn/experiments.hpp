#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kljn/adversary.hpp"
#include "kljn/protocol.hpp"

// Batch experiment layer: parameter sweeps, metrics aggregation and CSV
// emission. Everything here is deterministic given the root seed; per-point
// streams derive from (root, point index) and per-slot streams from
// (point, slot index), so extending a sweep never perturbs existing points.

namespace kljn {

enum class EveModel { None, Auto, PassiveIdeal, WireResistance, ExactPairGuess };

const char* eve_model_name(EveModel m);
std::optional<EveModel> eve_model_from_name(std::string_view name);

// Auto picks the strongest applicable tap: the ideal wire carries no
// directional information, so a resistive wire upgrades Eve to the
// endpoint-difference attack (classic pair) or full pair identification
// (larger banks).
EveModel resolve_eve_model(const ProtocolConfig& config, EveModel requested);

// Per-slot adversary hook for run_slots / run_key_exchange. window < 1
// observes the full slot. On truth-secure slots where the model abstains
// from a bit guess, a fair coin is recorded instead so the success metric
// stays a well-defined binomial.
SlotObserver make_eve_observer(const ProtocolConfig& config, EveModel model,
                               Eigen::Index window);

struct SweepSpec {
  ProtocolConfig base;
  std::string parameter; // samples_per_slot | r_w | n | variant
  std::vector<double> values;              // numeric parameters
  std::vector<std::string> variant_values; // parameter == "variant"
  std::size_t slots_per_point = 1000;
  std::uint64_t root_seed = 1;
  EveModel eve = EveModel::Auto;
  Eigen::Index eve_window = 0; // 0 = full slot
  bool keep_slot_logs = false;
};

struct MetricsRow {
  std::size_t point_id = 0;
  std::string param_name;
  std::string param_value;
  std::size_t slots = 0;
  double ber = 0;               // Alice vs Bob disagreement over kept slots
  double secure_fraction = 0;   // kept slots / slots
  double discard_inconclusive = 0; // includes inconsistent and cancelled slots
  double discard_insecure = 0;
  double eve_bit_success = 0;   // over truth-secure slots with an adversary guess
  double eve_bit_ci = 0;        // 95% binomial half-width
  double eve_slot_acc = 0;      // situation-guess accuracy over observed slots
  double mean_margin = 0;       // mean of per-slot decision margins
  std::uint64_t seed = 0;       // derived point seed
};

// 1.96 * sqrt(p(1-p)/n); 0 when n = 0.
double binomial_ci_halfwidth(double p_hat, std::size_t n);

// Ground-truth three-level label of a slot: Mid when the indices differ,
// otherwise LL/HH by which side of the geometric bank midpoint the shared
// resistor falls.
Situation true_situation(const ResistorBank& bank, int a, int b);

// n geometrically spaced resistances spanning [r_low, r_high].
ResistorBank geometric_bank(double r_low, double r_high, int n);

MetricsRow aggregate_metrics(std::size_t point_id, std::string param_name,
                             std::string param_value, const ResistorBank& bank,
                             std::span<const SlotRecord> records, std::uint64_t seed);

struct SweepResult {
  std::vector<MetricsRow> rows;
  std::vector<std::vector<SlotRecord>> logs; // filled when keep_slot_logs
};

// One metrics row per swept value. Throws std::runtime_error on an
// unrecognized parameter name or an empty value list.
SweepResult run_sweep(const SweepSpec& spec);

// Side-by-side runs sharing the exact same root stream, so variants see
// identical noise wherever the draws line up dimensionally. All configs
// must agree on the bank span and samples_per_slot.
std::vector<MetricsRow> compare_variants(std::span<const ProtocolConfig> configs,
                                         std::size_t slots, std::uint64_t seed,
                                         EveModel eve = EveModel::Auto,
                                         Eigen::Index eve_window = 0);

// Sample-efficiency benchmark of the two always-decide far-end inference
// rules on uniformly drawn slots: the level-only nearest-candidate rule vs
// the reduced-noise likelihood rule. The latter strips the party's own
// predicted contribution under each candidate and scores the leftover by
// its exact Gaussian log-likelihood,
//   score_j = N ln var_j + sum u*^2 / var_j,
//   var_j   = 4kT df * R_j r_own^2 / (R_j + r_own)^2.
// A wrong candidate both shifts the leftover variance and leaks the party's
// own noise into u*, so the likelihood fuses the level and correlation
// information with the correct relative weights. The discard-gated
// production rules cannot be compared this way: at small N they mostly
// abstain, which is not a decision error.
struct SpeedupBenchmark {
  std::vector<Eigen::Index> grid;
  std::vector<double> err_level, err_fused; // paired on identical slots
  Eigen::Index required_level = 0, required_fused = 0; // 0 = target unmet on grid
  std::size_t trials = 0;
};

SpeedupBenchmark benchmark_decision_speedup(const ProtocolConfig& config,
                                            std::span<const Eigen::Index> grid,
                                            std::size_t trials, double target_error,
                                            std::uint64_t seed);

// CSV emission; header + one line per row, fixed "%.12g" number format so
// equal inputs give byte-identical output.
std::string metrics_csv(std::span<const MetricsRow> rows);
std::string slot_log_csv(std::span<const SlotRecord> records);

} // namespace kljn
