#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kljn/circuit.hpp"
#include "kljn/series.hpp"

// Self-check battery: closed-form identities of the noise, loop and decision
// layers evaluated on fresh Monte Carlo draws. Every result carries the
// measured value, the closed-form expectation and the tolerance actually
// applied, so a failure is directly actionable from the printout.

namespace kljn {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0;
  double expected = 0;
  double tolerance = 0;
  std::string detail;
};

// Loop solver used by the directional power-flow checks; injectable so a
// deliberately broken solver (e.g. flipped current sign) is observable as a
// check failure rather than silently absorbed.
using LoopSolverFn =
    std::function<LoopTrace(const SeriesRef&, const SeriesRef&, double, double)>;

// quick shrinks the sample counts for smoke runs and widens the statistical
// gates accordingly. Deterministic given the seed.
std::vector<CheckResult> run_identity_checks(std::uint64_t seed, bool quick = false,
                                             LoopSolverFn solver = {});

bool all_passed(std::span<const CheckResult> checks);

} // namespace kljn
