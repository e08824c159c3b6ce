#include "kljn/truthtable.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kljn/rng.hpp"

namespace kljn {

ResistorBank::ResistorBank(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw std::invalid_argument("ResistorBank: need at least two resistors");
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!(values_[k] > 0) || !std::isfinite(values_[k])) {
      throw std::invalid_argument("ResistorBank: resistances must be positive and finite");
    }
    if (k > 0 && !(values_[k] > values_[k - 1])) {
      throw std::invalid_argument("ResistorBank: values must be strictly increasing");
    }
  }
}

double ResistorBank::value(int index) const {
  if (index < 0 || index >= n()) {
    throw std::logic_error("ResistorBank: index out of range");
  }
  return values_[static_cast<std::size_t>(index)];
}

TruthTable::TruthTable(int n, std::vector<std::int8_t> bits) : n_(n), bits_(std::move(bits)) {
  if (n_ < 2) {
    throw std::invalid_argument("TruthTable: need n >= 2");
  }
  if (bits_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_)) {
    throw std::logic_error("TruthTable: bit matrix size mismatch");
  }
}

int TruthTable::bit(int i, int j) const {
  if (i < 0 || i >= n_ || j < 0 || j >= n_) {
    throw std::logic_error("TruthTable: index out of range");
  }
  if (i == j) {
    throw std::logic_error("TruthTable: diagonal is undefined (insecure slot)");
  }
  return bits_[static_cast<std::size_t>(i) * n_ + j];
}

TruthTable TruthTable::flipped() const {
  std::vector<std::int8_t> out(bits_.size());
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    out[k] = bits_[k] < 0 ? bits_[k] : static_cast<std::int8_t>(1 - bits_[k]);
  }
  return TruthTable(n_, std::move(out));
}

std::string TruthTable::to_json() const {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i == j) continue;
      if (!first) os << ",";
      first = false;
      os << "\"" << i << "," << j << "\":" << bit(i, j);
    }
  }
  os << "}";
  return os.str();
}

TruthTable build_public_table(int n) {
  if (n < 2) {
    throw std::invalid_argument("build_public_table: need n >= 2");
  }
  std::vector<std::int8_t> bits(static_cast<std::size_t>(n) * n, -1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int parity = (i + j) & 1;
      const int below = i < j ? 1 : 0;
      bits[static_cast<std::size_t>(i) * n + j] = static_cast<std::int8_t>(parity ^ below);
    }
  }
  return TruthTable(n, std::move(bits));
}

std::optional<int> interpret(int i, int j, const TruthTable& table) {
  if (i < 0 || i >= table.n() || j < 0 || j >= table.n()) {
    throw std::logic_error("interpret: index out of range");
  }
  if (i == j) {
    return std::nullopt;
  }
  return table.bit(i, j);
}

KeyedSchedule::KeyedSchedule(TruthTable base, std::vector<std::uint8_t> flips, std::uint64_t key_id)
    : base_(base), flipped_(base.flipped()), flips_(std::move(flips)), key_id_(key_id) {}

bool KeyedSchedule::flip(std::size_t slot) const {
  if (slot >= flips_.size()) {
    throw std::logic_error("KeyedSchedule: slot out of range");
  }
  return flips_[slot] != 0;
}

const TruthTable& KeyedSchedule::table(std::size_t slot) const {
  return flip(slot) ? flipped_ : base_;
}

KeyedSchedule derive_keyed_schedule(std::span<const int> prior_key, std::size_t n_slots, int n) {
  if (prior_key.empty()) {
    throw std::invalid_argument("derive_keyed_schedule: prior key must be non-empty");
  }
  if (n_slots < 1) {
    throw std::invalid_argument("derive_keyed_schedule: need at least one slot");
  }
  for (int b : prior_key) {
    if (b != 0 && b != 1) {
      throw std::invalid_argument("derive_keyed_schedule: key bits must be 0 or 1");
    }
  }
  // Absorb the key bit-by-bit so that any single-bit change avalanches
  // through the whole schedule.
  std::uint64_t key_id = detail::mix64(0x4B65794B4C4A4Eull + prior_key.size());
  for (std::size_t k = 0; k < prior_key.size(); ++k) {
    key_id = detail::mix64(key_id + detail::kGamma * (2 * k + 1 + static_cast<std::uint64_t>(prior_key[k])));
  }
  RngStream stream(key_id);
  std::vector<std::uint8_t> flips(n_slots);
  for (std::size_t s = 0; s < n_slots; ++s) {
    flips[s] = static_cast<std::uint8_t>(stream.bit());
  }
  return KeyedSchedule(build_public_table(n), std::move(flips), key_id);
}

} // namespace kljn
