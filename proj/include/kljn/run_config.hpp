#pragma once

#include <cstdint>
#include <string>

#include "kljn/experiments.hpp"
#include "kljn/protocol.hpp"

// JSON run configuration. Strict schema: unknown keys are rejected with the
// offending field path, missing required fields are named, and nothing is
// executed or written before the whole document validates.

namespace kljn {

struct SimulateSpec {
  std::size_t n_bits = 128;
  EveModel eve = EveModel::Auto;
  Eigen::Index eve_window = 0; // 0 = full slot
};

struct RunConfig {
  ProtocolConfig protocol;
  SimulateSpec simulate;
  bool has_sweep = false;
  SweepSpec sweep; // base is filled from protocol
  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

// Throws std::runtime_error naming the field path on any schema violation;
// the embedded protocol section is also run through validate_config.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

} // namespace kljn
