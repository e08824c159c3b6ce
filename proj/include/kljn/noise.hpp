#pragma once

#include <cstdint>

#include "kljn/rng.hpp"
#include "kljn/series.hpp"

namespace kljn {

// Noise environment shared by all generators: effective temperature,
// noise bandwidth and unit mode. A Johnson-like generator on resistance R
// has spectral density 4*k*T_eff*R, i.e. variance 4*k*T_eff*R*df over the
// band. Band-limited white noise is modeled as i.i.d. Gaussian samples at
// the Nyquist rate f_s = 2*df, each carrying the full band variance.
struct NoiseParams {
  double t_eff = 1.0;     // effective temperature [K]
  double bandwidth = 1.0; // noise bandwidth df [Hz]
  double boltzmann = 1.380649e-23;
  bool normalized = false; // true: units chosen so 4*k*T_eff*df == 1

  // SI units; throws std::invalid_argument on non-positive parameters.
  static NoiseParams si(double t_eff, double bandwidth, double boltzmann = 1.380649e-23);

  // Normalized units: a generator on resistance R has variance exactly R.
  static NoiseParams unit();

  // 4*k*T_eff*df: generator variance per ohm of source resistance.
  double variance_per_ohm() const;

  double variance(double resistance) const { return variance_per_ohm() * resistance; }
};

struct NoiseSeries {
  Series samples;        // generator voltage series [V]
  double resistance = 0; // source resistance [ohm]
  std::uint64_t seed_id = 0;
};

// Draws one generator series: n i.i.d. zero-mean Gaussian samples with
// variance 4*k*T_eff*resistance*df. Deterministic given the stream state.
// resistance must be finite and >= 0 (R = 0 yields the all-zero series).
NoiseSeries sample_noise(double resistance, const NoiseParams& params, Eigen::Index n_samples,
                         RngStream& stream);

// Variance-profile variant for slowly drifting resistances: sample t has
// variance 4*k*T_eff*resistance_of_t[t]*df, keeping the noise temperature
// at T_eff while R(t) moves.
Series sample_noise_profile(const SeriesRef& resistance_of_t, const NoiseParams& params,
                            RngStream& stream);

} // namespace kljn
