#include "kljn/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace kljn {

NoiseParams NoiseParams::si(double t_eff, double bandwidth, double boltzmann) {
  if (!(t_eff > 0) || !std::isfinite(t_eff))
    throw std::invalid_argument("NoiseParams: t_eff must be positive");
  if (!(bandwidth > 0) || !std::isfinite(bandwidth))
    throw std::invalid_argument("NoiseParams: bandwidth must be positive");
  if (!(boltzmann > 0) || !std::isfinite(boltzmann))
    throw std::invalid_argument("NoiseParams: boltzmann must be positive");
  return NoiseParams{t_eff, bandwidth, boltzmann, false};
}

NoiseParams NoiseParams::unit() { return NoiseParams{1.0, 1.0, 1.0, true}; }

double NoiseParams::variance_per_ohm() const {
  return normalized ? 1.0 : 4.0 * boltzmann * t_eff * bandwidth;
}

NoiseSeries sample_noise(double resistance, const NoiseParams& params, Eigen::Index n_samples,
                         RngStream& stream) {
  if (!std::isfinite(resistance) || resistance < 0)
    throw std::invalid_argument("sample_noise: resistance must be finite and >= 0");
  if (n_samples < 1) throw std::invalid_argument("sample_noise: n_samples must be >= 1");

  NoiseSeries out;
  out.resistance = resistance;
  out.seed_id = stream.key();
  out.samples.resize(n_samples);
  stream.fill_normal(out.samples, std::sqrt(params.variance(resistance)));
  return out;
}

Series sample_noise_profile(const SeriesRef& resistance_of_t, const NoiseParams& params,
                            RngStream& stream) {
  const double per_ohm = params.variance_per_ohm();
  Series out(resistance_of_t.size());
  for (Eigen::Index t = 0; t < out.size(); ++t) {
    const double r = resistance_of_t[t];
    if (!std::isfinite(r) || r < 0)
      throw std::invalid_argument("sample_noise_profile: resistance must be finite and >= 0");
    out[t] = std::sqrt(per_ohm * r) * stream.normal();
  }
  return out;
}

} // namespace kljn
