#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "kljn/rng.hpp"
#include "kljn/truthtable.hpp"

using namespace kljn;

TEST_CASE("resistor bank validation") {
  CHECK_THROWS_AS(ResistorBank({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ResistorBank({1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ResistorBank({4.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ResistorBank({-1.0, 4.0}), std::invalid_argument);
  CHECK_THROWS_AS(ResistorBank({0.0, 4.0}), std::invalid_argument);

  const ResistorBank bank({1.0, 2.0, 4.0});
  CHECK(bank.n() == 3);
  CHECK(bank.r_low() == 1.0);
  CHECK(bank.r_high() == 4.0);
  CHECK(bank.value(1) == 2.0);
  CHECK_THROWS_AS(bank.value(3), std::logic_error);
  CHECK_THROWS_AS(bank.value(-1), std::logic_error);
}

TEST_CASE("public table oracle bits") {
  const TruthTable t2 = build_public_table(2);
  CHECK(t2.bit(1, 0) == 1); // high against low reads 1
  CHECK(t2.bit(0, 1) == 0);
  CHECK_THROWS_AS(t2.bit(0, 0), std::logic_error);
  CHECK_THROWS_AS(t2.bit(2, 0), std::logic_error);

  const TruthTable t3 = build_public_table(3);
  // adjacent far indices against the same own index give opposite bits
  CHECK(t3.bit(0, 2) != t3.bit(0, 1));
  CHECK(t3.bit(1, 2) != t3.bit(0, 2));
}

TEST_CASE("table invariants hold exhaustively for small banks") {
  for (int n = 2; n <= 8; ++n) {
    const TruthTable t = build_public_table(n);
    const TruthTable f = t.flipped();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        CHECK(t.bit(i, j) + t.bit(j, i) == 1);
        CHECK(f.bit(i, j) == 1 - t.bit(i, j));
        if (i + 1 < n && i + 1 != j) {
          CHECK(t.bit(i + 1, j) == 1 - t.bit(i, j));
        }
        if (j + 1 < n && j + 1 != i) {
          CHECK(t.bit(i, j + 1) == 1 - t.bit(i, j));
        }
      }
    }
  }
}

TEST_CASE("interpret maps secure pairs and flags the diagonal") {
  const TruthTable t = build_public_table(4);
  for (int i = 0; i < 4; ++i) {
    CHECK(!interpret(i, i, t).has_value());
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      const auto own = interpret(i, j, t);
      const auto far = interpret(j, i, t);
      REQUIRE(own.has_value());
      REQUIRE(far.has_value());
      CHECK((*own ^ *far) == 1);
    }
  }
  CHECK(*interpret(1, 0, build_public_table(2)) == 1);
  CHECK_THROWS_AS(interpret(0, 4, t), std::logic_error);
}

TEST_CASE("keyed schedule is deterministic and key-sensitive") {
  std::vector<int> key(32);
  RngStream st(31);
  for (auto& b : key) b = st.bit() ? 1 : 0;

  const std::size_t n_slots = 1000;
  const KeyedSchedule a = derive_keyed_schedule(key, n_slots, 2);
  const KeyedSchedule b = derive_keyed_schedule(key, n_slots, 2);
  REQUIRE(a.size() == n_slots);
  REQUIRE(b.size() == n_slots);
  CHECK(a.key_id() == b.key_id());
  for (std::size_t s = 0; s < n_slots; ++s) {
    CHECK(a.flip(s) == b.flip(s));
  }

  // one flipped key bit decorrelates about half the schedule
  std::vector<int> twin = key;
  twin[7] ^= 1;
  const KeyedSchedule c = derive_keyed_schedule(twin, n_slots, 2);
  CHECK(c.key_id() != a.key_id());
  std::size_t differ = 0;
  for (std::size_t s = 0; s < n_slots; ++s) {
    if (a.flip(s) != c.flip(s)) ++differ;
  }
  const double frac = static_cast<double>(differ) / static_cast<double>(n_slots);
  CHECK(frac > 0.45);
  CHECK(frac < 0.55);

  // independently drawn keys agree on about half the slots too
  std::vector<int> other(32);
  for (auto& bit : other) bit = st.bit() ? 1 : 0;
  const KeyedSchedule d = derive_keyed_schedule(other, n_slots, 2);
  std::size_t agree = 0;
  for (std::size_t s = 0; s < n_slots; ++s) {
    if (a.flip(s) == d.flip(s)) ++agree;
  }
  const double agree_frac = static_cast<double>(agree) / static_cast<double>(n_slots);
  CHECK(agree_frac > 0.45);
  CHECK(agree_frac < 0.55);

  // per-slot table selection matches the flip mask
  for (std::size_t s = 0; s < 16; ++s) {
    const int expected = a.flip(s) ? 0 : 1;
    CHECK(a.table(s).bit(1, 0) == expected);
  }

  CHECK_THROWS_AS(derive_keyed_schedule({}, n_slots, 2), std::invalid_argument);
  CHECK_THROWS_AS(derive_keyed_schedule(key, 0, 2), std::invalid_argument);
  std::vector<int> bad = {0, 1, 2};
  CHECK_THROWS_AS(derive_keyed_schedule(bad, n_slots, 2), std::invalid_argument);
}

TEST_CASE("table json lists every off-diagonal entry") {
  CHECK(build_public_table(2).to_json() == "{\"0,1\":0,\"1,0\":1}");
}
