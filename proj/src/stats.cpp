#include "kljn/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace kljn {

const char* situation_name(Situation s) {
  switch (s) {
    case Situation::LL: return "LL";
    case Situation::Mid: return "MID";
    case Situation::HH: return "HH";
  }
  return "?";
}

PairLevels pair_levels(double r_a, double r_b, const NoiseParams& params) {
  if (!(r_a > 0) || !(r_b > 0) || !std::isfinite(r_a) || !std::isfinite(r_b)) {
    throw std::invalid_argument("pair_levels: resistances must be positive and finite");
  }
  const double per_ohm = params.variance_per_ohm();
  const double sum = r_a + r_b;
  return {per_ohm * r_a * r_b / sum, per_ohm / sum};
}

PairLevels endpoint_levels(double r_own, double r_far, double r_w, const NoiseParams& params) {
  if (!(r_w >= 0) || !std::isfinite(r_w)) {
    throw std::invalid_argument("endpoint_levels: wire resistance must be finite and >= 0");
  }
  if (r_w == 0) {
    return pair_levels(r_own, r_far, params);
  }
  if (!(r_own > 0) || !(r_far > 0) || !std::isfinite(r_own) || !std::isfinite(r_far)) {
    throw std::invalid_argument("endpoint_levels: resistances must be positive and finite");
  }
  const double per_ohm = params.variance_per_ohm();
  const double rho = r_own + r_w + r_far;
  const double far_leg = r_w + r_far;
  PairLevels lv;
  lv.ms_u = per_ohm * (r_own * far_leg * far_leg + r_far * r_own * r_own) / (rho * rho);
  lv.ms_i = per_ohm * (r_own + r_far) / (rho * rho);
  return lv;
}

LevelTable predict_levels(double r_low, double r_high, const NoiseParams& params) {
  if (!(r_low > 0) || !(r_high > r_low)) {
    throw std::invalid_argument("predict_levels: need 0 < r_low < r_high");
  }
  LevelTable t;
  const PairLevels ll = pair_levels(r_low, r_low, params);
  const PairLevels mid = pair_levels(r_low, r_high, params);
  const PairLevels hh = pair_levels(r_high, r_high, params);
  t.ms_u_ll = ll.ms_u;
  t.ms_i_ll = ll.ms_i;
  t.ms_u_mid = mid.ms_u;
  t.ms_i_mid = mid.ms_i;
  t.ms_u_hh = hh.ms_u;
  t.ms_i_hh = hh.ms_i;
  return t;
}

double mean_square(const SeriesRef& series) {
  if (series.size() == 0) {
    throw std::logic_error("mean_square: empty series");
  }
  return series.square().mean();
}

namespace {

// Squared distance in joint log space; guards non-positive observations.
double log_dist2(double ms_u, double ms_i, double lu, double li) {
  const double du = std::log(ms_u) - std::log(lu);
  const double di = std::log(ms_i) - std::log(li);
  return du * du + di * di;
}

} // namespace

SituationClass classify_situation(double ms_u, double ms_i, const LevelTable& levels) {
  if (!(ms_u > 0) || !(ms_i > 0) || !std::isfinite(ms_u) || !std::isfinite(ms_i)) {
    return {Situation::Mid, 0.0};
  }
  const Situation labels[3] = {Situation::LL, Situation::Mid, Situation::HH};
  const double d2[3] = {
      log_dist2(ms_u, ms_i, levels.ms_u_ll, levels.ms_i_ll),
      log_dist2(ms_u, ms_i, levels.ms_u_mid, levels.ms_i_mid),
      log_dist2(ms_u, ms_i, levels.ms_u_hh, levels.ms_i_hh),
  };
  int best = 0;
  for (int k = 1; k < 3; ++k) {
    if (d2[k] < d2[best]) best = k;
  }
  double runner_up = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (k != best) runner_up = std::min(runner_up, d2[k]);
  }
  return {labels[best], std::sqrt(runner_up) - std::sqrt(d2[best])};
}

CandidateClass classify_far_resistor(double ms_u, double ms_i, double r_own,
                                     std::span<const double> bank, const NoiseParams& params,
                                     double r_w) {
  if (bank.size() < 2) {
    throw std::invalid_argument("classify_far_resistor: bank needs at least two entries");
  }
  if (!(ms_u > 0) || !(ms_i > 0) || !std::isfinite(ms_u) || !std::isfinite(ms_i)) {
    return {-1, 0.0};
  }
  std::vector<double> d2(bank.size());
  for (std::size_t j = 0; j < bank.size(); ++j) {
    const PairLevels lv = endpoint_levels(r_own, bank[j], r_w, params);
    d2[j] = log_dist2(ms_u, ms_i, lv.ms_u, lv.ms_i);
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < bank.size(); ++j) {
    if (d2[j] < d2[best]) best = j;
  }
  double runner_up = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < bank.size(); ++j) {
    if (j != best) runner_up = std::min(runner_up, d2[j]);
  }
  return {static_cast<int>(best), std::sqrt(runner_up) - std::sqrt(d2[best])};
}

Correlation cross_correlation(const SeriesRef& x, const SeriesRef& y) {
  if (x.size() != y.size()) {
    throw std::logic_error("cross_correlation: length mismatch");
  }
  if (x.size() < 2) {
    throw std::logic_error("cross_correlation: need at least two samples");
  }
  Correlation c;
  c.raw = (x * y).mean();
  const double rms_x = std::sqrt(x.square().mean());
  const double rms_y = std::sqrt(y.square().mean());
  c.normalized = (rms_x > 0 && rms_y > 0) ? c.raw / (rms_x * rms_y) : 0.0;
  return c;
}

} // namespace kljn
