#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kljn {

// Strictly increasing resistor values shared by both parties. n = 2 is the
// classic {R_L, R_H} pair; n > 2 enables the multi-bit pair interpretation.
class ResistorBank {
 public:
  explicit ResistorBank(std::vector<double> values);

  int n() const { return static_cast<int>(values_.size()); }
  double value(int index) const;
  double r_low() const { return values_.front(); }
  double r_high() const { return values_.back(); }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

// Antisymmetric bit interpretation of ordered resistor-index pairs (i, j),
// i = own index, j = far index, 0-based. The diagonal is undefined: equal
// resistances make an insecure slot, not a bit. Construction guarantees
//   bit(i,j) == 1 - bit(j,i)            (antisymmetry)
//   bit(i+-1,j) == 1 - bit(i,j)         (neighbor flip, order preserved)
class TruthTable {
 public:
  TruthTable(int n, std::vector<std::int8_t> bits);

  int n() const { return n_; }
  // Throws std::logic_error on the diagonal or out-of-range indices.
  int bit(int i, int j) const;
  // Same table with every bit inverted; both invariants are preserved.
  TruthTable flipped() const;

  std::string to_json() const;

 private:
  int n_;
  std::vector<std::int8_t> bits_; // n*n row-major; diagonal entries -1
};

// Public table bit(i,j) = parity(i+j) XOR indicator(i<j). For n=2 this
// reproduces the classic convention: the party holding the higher resistor
// against a lower far end reads 1.
TruthTable build_public_table(int n);

// Secure slot: bit for i != j; equal indices return the insecure marker.
std::optional<int> interpret(int i, int j, const TruthTable& table);

// Per-slot orientation schedule derived from a previously shared key. Each
// slot uses either the public table or its flipped twin, chosen by a keyed
// pseudorandom mask, so pair identification alone reveals nothing about the
// bit without the key.
class KeyedSchedule {
 public:
  KeyedSchedule(TruthTable base, std::vector<std::uint8_t> flips, std::uint64_t key_id);

  std::size_t size() const { return flips_.size(); }
  bool flip(std::size_t slot) const;
  const TruthTable& table(std::size_t slot) const;
  std::uint64_t key_id() const { return key_id_; }

 private:
  TruthTable base_;
  TruthTable flipped_;
  std::vector<std::uint8_t> flips_;
  std::uint64_t key_id_;
};

// Deterministic expansion of the prior key into n_slots orientation bits.
// Identical inputs give identical schedules; a single flipped key bit
// decorrelates about half the slots.
KeyedSchedule derive_keyed_schedule(std::span<const int> prior_key, std::size_t n_slots, int n);

} // namespace kljn
