#include "kljn/adversary.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kljn/noise.hpp"

namespace kljn {

namespace {

void check_window(Eigen::Index window, Eigen::Index available, const char* who) {
  if (window < 1) {
    throw std::logic_error(std::string(who) + ": window must be at least 1");
  }
  if (window > available) {
    throw std::logic_error(std::string(who) + ": window exceeds the trace length");
  }
}

// Phi(z) for the confidence of a one-sided direction decision.
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

} // namespace

EveReport eve_passive_ideal(const SeriesRef& u_ch, const SeriesRef& i_ch,
                            const LevelTable& levels, Eigen::Index window, RngStream& rng) {
  check_window(window, std::min(u_ch.size(), i_ch.size()), "eve_passive_ideal");
  const double ms_u = u_ch.head(window).square().mean();
  const double ms_i = i_ch.head(window).square().mean();
  const SituationClass sc = classify_situation(ms_u, ms_i, levels);
  EveReport r;
  r.situation_guess = sc.label;
  r.confidence = sc.margin / (1.0 + sc.margin);
  r.observed_window = window;
  if (sc.label == Situation::Mid) {
    r.bit_guess = rng.bit() ? 1 : 0;
  }
  return r;
}

EveReport eve_wire_resistance(const SeriesRef& u_end_a, const SeriesRef& u_end_b,
                              const SeriesRef& i_ch, const ResistorBank& bank,
                              const NoiseParams& params, double r_w, Eigen::Index window,
                              RngStream& rng) {
  if (bank.n() != 2) {
    throw std::invalid_argument("eve_wire_resistance: defined for the classic pair only");
  }
  check_window(window, std::min({u_end_a.size(), u_end_b.size(), i_ch.size()}),
               "eve_wire_resistance");
  const LevelTable levels = predict_levels(bank.r_low(), bank.r_high(), params);
  const Series u_mid = 0.5 * (u_end_a.head(window) + u_end_b.head(window));
  if (r_w <= 0) {
    EveReport r = eve_passive_ideal(u_mid, i_ch.head(window), levels, window, rng);
    r.confidence = 0.5;
    return r;
  }
  EveReport r;
  r.observed_window = window;
  const double ms_u = u_mid.square().mean();
  const double ms_i = i_ch.head(window).square().mean();
  const SituationClass sc = classify_situation(ms_u, ms_i, levels);
  r.situation_guess = sc.label;
  if (sc.label != Situation::Mid) {
    r.confidence = sc.margin / (1.0 + sc.margin);
    return r;
  }
  // Direction statistic: d_t = u_end_a^2 - u_end_b^2 has mean
  // 4kT df r_w^2 (r_a - r_b)/rho^2, so its sign locates the larger
  // resistor. Confidence is the normal tail of the measured SNR.
  const Series d = u_end_a.head(window).square() - u_end_b.head(window).square();
  const double mean_d = d.mean();
  const double var_d = (d - mean_d).square().sum() / static_cast<double>(window - 1);
  const double se = std::sqrt(var_d / static_cast<double>(window));
  const double z = se > 0 ? mean_d / se : 0.0;
  // Larger noise at Alice's end means r_a = r_high: the ordered pair is
  // (high, low), whose public-table bit is 1.
  r.bit_guess = mean_d > 0 ? 1 : 0;
  r.confidence = normal_cdf(std::abs(z));
  return r;
}

EveReport eve_exact_pair_guess(const SeriesRef& u_end_a, const SeriesRef& u_end_b,
                               const SeriesRef& i_ch, const ResistorBank& bank,
                               const NoiseParams& params, double r_w, bool keyed_table,
                               const TruthTable& table, Eigen::Index window, RngStream& rng) {
  if (table.n() != bank.n()) {
    throw std::logic_error("eve_exact_pair_guess: table size does not match the bank");
  }
  check_window(window, std::min({u_end_a.size(), u_end_b.size(), i_ch.size()}),
               "eve_exact_pair_guess");
  EveReport r;
  r.observed_window = window;
  const double ms_a = u_end_a.head(window).square().mean();
  const double ms_b = u_end_b.head(window).square().mean();
  const double ms_i = i_ch.head(window).square().mean();
  if (!(ms_a > 0) || !(ms_b > 0) || !(ms_i > 0)) {
    r.bit_guess = rng.bit() ? 1 : 0;
    r.confidence = 0.5;
    return r;
  }
  const double la = std::log(ms_a);
  const double lb = std::log(ms_b);
  const double li = std::log(ms_i);
  const int n = bank.n();
  double best = std::numeric_limits<double>::infinity();
  double runner = best;
  int best_i = 0, best_j = 0, runner_i = 0, runner_j = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const PairLevels pa = endpoint_levels(bank.value(i), bank.value(j), r_w, params);
      const PairLevels pb = endpoint_levels(bank.value(j), bank.value(i), r_w, params);
      const double da = la - std::log(pa.ms_u);
      const double db = lb - std::log(pb.ms_u);
      const double di = li - std::log(pa.ms_i);
      const double score = da * da + db * db + di * di;
      if (score < best) {
        runner = best;
        runner_i = best_i;
        runner_j = best_j;
        best = score;
        best_i = i;
        best_j = j;
      } else if (score < runner) {
        runner = score;
        runner_i = i;
        runner_j = j;
      }
    }
  }
  // With an ideal wire the two orderings of a pair predict identical
  // observables and tie exactly; an undecidable tie falls to a coin.
  if (runner - best <= 1e-12 * (1.0 + best) && rng.bit()) {
    std::swap(best_i, runner_i);
    std::swap(best_j, runner_j);
    std::swap(best, runner);
  }
  r.pair_guess = std::make_pair(best_i, best_j);
  const double denom = best + runner;
  r.confidence = denom > 0 ? std::abs(runner - best) / denom : 0.0;
  if (best_i == best_j) {
    const double split = std::sqrt(bank.r_low() * bank.r_high());
    r.situation_guess = bank.value(best_i) <= split ? Situation::LL : Situation::HH;
    return r;
  }
  r.situation_guess = Situation::Mid;
  if (keyed_table) {
    r.bit_guess = rng.bit() ? 1 : 0;
    r.confidence = 0.5;
  } else {
    r.bit_guess = table.bit(best_i, best_j);
  }
  return r;
}

} // namespace kljn
