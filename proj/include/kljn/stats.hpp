#pragma once

#include <cmath>
#include <span>

#include "kljn/noise.hpp"
#include "kljn/series.hpp"

namespace kljn {

// Predicted mean-square channel levels for a two-resistor bank. The three
// situations are LL (both low), the secure mid pair (HL/LH, identical by
// construction) and HH.
struct LevelTable {
  double ms_u_ll = 0, ms_u_mid = 0, ms_u_hh = 0; // [V^2]
  double ms_i_ll = 0, ms_i_mid = 0, ms_i_hh = 0; // [A^2]
};

enum class Situation { LL, Mid, HH };

const char* situation_name(Situation s);

struct SituationClass {
  Situation label = Situation::Mid;
  double margin = 0; // log-space distance gap to the nearest competing level
};

// Closed-form levels for an arbitrary resistor pair:
//   <u_ch^2> = 4kT df * r_a*r_b/(r_a+r_b),  <i_ch^2> = 4kT df / (r_a+r_b).
// With r_a == r_b == R this is the insecure-slot pair (R/2, 1/(2R)).
struct PairLevels {
  double ms_u = 0;
  double ms_i = 0;
};
PairLevels pair_levels(double r_a, double r_b, const NoiseParams& params);

// Mean squares seen from one end of a wire with series resistance r_w:
// the terminal voltage behind the own resistor and the loop current. With
// rho = r_own + r_w + r_far,
//   <u_end^2> = 4kT df * (r_own (r_w + r_far)^2 + r_far r_own^2) / rho^2
//   <i^2>     = 4kT df * (r_own + r_far) / rho^2
// which reduces to pair_levels at r_w = 0.
PairLevels endpoint_levels(double r_own, double r_far, double r_w, const NoiseParams& params);

// Level table for a bank {r_low < r_high}; throws if r_low >= r_high.
LevelTable predict_levels(double r_low, double r_high, const NoiseParams& params);

// Arithmetic mean of squares; throws std::logic_error on an empty series.
double mean_square(const SeriesRef& series);

// Nearest level in joint (log ms_u, log ms_i) space, equal weight on the
// voltage and current coordinates. Always classifies; an unreliable input
// (non-positive or non-finite mean squares) comes back with margin 0.
SituationClass classify_situation(double ms_u, double ms_i, const LevelTable& levels);

// Far-end resistor inference for a party that knows its own resistance:
// nearest candidate in the same joint log space, over the bank. r_w > 0
// switches the predictions to the endpoint levels.
struct CandidateClass {
  int index = -1;    // inferred far-end bank index
  double margin = 0; // log-space distance gap to the runner-up
};
CandidateClass classify_far_resistor(double ms_u, double ms_i, double r_own,
                                     std::span<const double> bank, const NoiseParams& params,
                                     double r_w = 0);

struct Correlation {
  double raw = 0;        // mean of elementwise products
  double normalized = 0; // raw / (rms(x) * rms(y)); 0 if either rms is 0
};

// Sample cross-correlation at zero lag; throws on length mismatch or
// length < 2.
Correlation cross_correlation(const SeriesRef& x, const SeriesRef& y);

// 3-sigma acceptance threshold for the normalized correlation of two
// independent series of length n (the null estimator has sd 1/sqrt(n)).
inline double independence_threshold(Eigen::Index n, double n_sigma = 3.0) {
  return n_sigma / std::sqrt(static_cast<double>(n));
}

} // namespace kljn
