#pragma once

#include <cstdint>
#include <string_view>
#include <unordered_set>

#include "kljn/series.hpp"

namespace kljn {

namespace detail {

// SplitMix64 finalizer. Full-avalanche 64-bit mixer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// FNV-1a over the label text, for string-addressed forks.
inline constexpr std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

} // namespace detail

// Counter-based random stream addressed by a hierarchical label path.
//
// A stream is identified by a 64-bit key; outputs are mix64(key + i*gamma)
// for i = 1, 2, ... (SplitMix64). Child streams derive their key from
// (parent key, label) alone, never from the parent's position, so any
// run/slot/party stream is reproducible in isolation from the root seed
// and its label path. Distinct keys give statistically independent
// sequences.
//
// Value type. Each worker must own its own (forked) stream; a single
// stream is not safe to share across threads.
class RngStream {
public:
  explicit RngStream(std::uint64_t root_seed)
      : key_(detail::mix64(root_seed ^ 0x4B4C4A4E73696Dull)) {}

  // Derives an independent child stream. A label may be used once per
  // parent; reuse throws (it would silently alias two streams).
  RngStream fork(std::uint64_t label);
  RngStream fork(std::string_view label) { return fork(detail::hash_label(label)); }
  RngStream fork(std::string_view label, std::uint64_t index) {
    return fork(detail::hash_label(label) + index);
  }

  // Stream identity: equal keys generate equal sequences.
  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() { return detail::mix64(key_ + detail::kGamma * ++counter_); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Unbiased via rejection.
  int uniform_int(int n);

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal();

  bool bit() { return next_u64() >> 63; }

  // Fills out with i.i.d. N(0, sigma^2) samples.
  void fill_normal(Eigen::Ref<Series> out, double sigma);

private:
  RngStream(std::uint64_t key, int) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
  std::unordered_set<std::uint64_t> used_labels_;
};

} // namespace kljn
