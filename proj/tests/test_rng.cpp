#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "kljn/rng.hpp"
#include "kljn/stats.hpp"

using namespace kljn;

TEST_CASE("same seed and label path reproduce the same sequence") {
  RngStream a(42);
  RngStream b(42);
  RngStream ca = a.fork("slot", 3);
  RngStream cb = b.fork("slot", 3);
  for (int k = 0; k < 100; ++k) {
    CHECK(ca.next_u64() == cb.next_u64());
  }
}

TEST_CASE("different root seeds give different sequences") {
  RngStream a(1);
  RngStream b(2);
  RngStream ca = a.fork("noise");
  RngStream cb = b.fork("noise");
  int equal = 0;
  for (int k = 0; k < 64; ++k) {
    if (ca.next_u64() == cb.next_u64()) ++equal;
  }
  CHECK(equal == 0);
}

TEST_CASE("fork rejects a duplicate label") {
  RngStream root(7);
  (void)root.fork("party_a");
  CHECK_THROWS_AS((void)root.fork("party_a"), std::runtime_error);
  (void)root.fork("party_b"); // distinct label is fine
  (void)root.fork("slot");
  // indexed fork with index 0 aliases the plain "slot" label
  CHECK_THROWS_AS((void)root.fork("slot", 0), std::runtime_error);
}

TEST_CASE("sibling streams are statistically independent") {
  const Eigen::Index n = 1000000;
  RngStream root(2024);
  RngStream a = root.fork("a");
  RngStream b = root.fork("b");
  Series xa(n), xb(n);
  a.fill_normal(xa, 1.0);
  b.fill_normal(xb, 1.0);
  const double corr = cross_correlation(xa, xb).normalized;
  CHECK(std::abs(corr) < independence_threshold(n, 4.0));
}

TEST_CASE("uniform_int is unbiased over its range") {
  RngStream st(5);
  const int n = 5;
  int counts[5] = {0, 0, 0, 0, 0};
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    const int v = st.uniform_int(n);
    REQUIRE(v >= 0);
    REQUIRE(v < n);
    ++counts[v];
  }
  // 4-sigma binomial band around draws/n
  const double mean = draws / static_cast<double>(n);
  const double sd = std::sqrt(draws * (1.0 / n) * (1.0 - 1.0 / n));
  for (int v = 0; v < n; ++v) {
    CHECK(std::abs(counts[v] - mean) < 4.0 * sd);
  }
  CHECK_THROWS_AS(st.uniform_int(0), std::invalid_argument);
}

TEST_CASE("normal draws have unit variance and zero mean") {
  RngStream st(99);
  const Eigen::Index n = 200000;
  Series x(n);
  st.fill_normal(x, 1.0);
  CHECK(std::abs(x.mean()) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(mean_square(x) - 1.0) <= 0.01);
}
