#include "kljn/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kljn {

RngStream RngStream::fork(std::uint64_t label) {
  if (!used_labels_.insert(label).second) {
    throw std::runtime_error("RngStream::fork: duplicate label " + std::to_string(label) +
                             " within parent stream");
  }
  const std::uint64_t child =
      detail::mix64(detail::mix64(key_ ^ 0xF0E1D2C3B4A59687ull) + detail::mix64(label + detail::kGamma));
  return RngStream(child, 0);
}

int RngStream::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("RngStream::uniform_int: n must be positive");
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<int>(x % un);
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // u1 in (0, 1] so the log is finite.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

void RngStream::fill_normal(Eigen::Ref<Series> out, double sigma) {
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = sigma * normal();
}

} // namespace kljn
