#include "kljn/run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace kljn {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("config: " + path + ": " + what);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(path + "." + it.key(), "unknown key");
  }
}

const json& require(const json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(path + "." + std::string(key), "missing required field");
  return *it;
}

double get_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::int64_t get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::uint64_t get_u64(const json& j, const std::string& path) {
  if (!(j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0))) {
    fail(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

NoiseParams parse_noise(const json& j, const std::string& path) {
  check_keys(j, path, {"normalized", "t_eff", "bandwidth", "boltzmann"});
  if (j.contains("normalized")) {
    if (!get_bool(j["normalized"], path + ".normalized")) {
      fail(path + ".normalized", "must be true when present; use t_eff/bandwidth for SI");
    }
    if (j.size() != 1) fail(path, "normalized noise takes no other fields");
    return NoiseParams::unit();
  }
  const double t_eff = get_double(require(j, path, "t_eff"), path + ".t_eff");
  const double bw = get_double(require(j, path, "bandwidth"), path + ".bandwidth");
  double kb = 1.380649e-23;
  if (j.contains("boltzmann")) kb = get_double(j["boltzmann"], path + ".boltzmann");
  try {
    return NoiseParams::si(t_eff, bw, kb);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

TableSource parse_table(const json& j, const std::string& path) {
  check_keys(j, path, {"source", "prior_key"});
  TableSource out;
  const std::string source = get_string(require(j, path, "source"), path + ".source");
  if (source == "public") {
    if (j.contains("prior_key")) fail(path + ".prior_key", "only valid with source \"keyed\"");
    return out;
  }
  if (source != "keyed") fail(path + ".source", "expected \"public\" or \"keyed\"");
  out.keyed = true;
  const json& key = require(j, path, "prior_key");
  if (!key.is_array() || key.empty()) fail(path + ".prior_key", "expected a non-empty array");
  for (std::size_t k = 0; k < key.size(); ++k) {
    const std::string p = path + ".prior_key[" + std::to_string(k) + "]";
    const std::int64_t bit = get_int(key[k], p);
    if (bit != 0 && bit != 1) fail(p, "expected 0 or 1");
    out.prior_key.push_back(static_cast<int>(bit));
  }
  return out;
}

TransientConfig parse_transient(const json& j, const std::string& path) {
  check_keys(j, path,
             {"enabled", "free_walk", "t_r", "step_size", "step_interval",
              "adiabatic_tolerance"});
  TransientConfig out;
  out.enabled = true; // the section's presence is the intent
  if (j.contains("enabled")) out.enabled = get_bool(j["enabled"], path + ".enabled");
  if (j.contains("free_walk")) out.free_walk = get_bool(j["free_walk"], path + ".free_walk");
  if (j.contains("t_r")) {
    out.t_r = static_cast<Eigen::Index>(get_int(j["t_r"], path + ".t_r"));
  }
  if (j.contains("step_size")) out.step_size = get_double(j["step_size"], path + ".step_size");
  if (j.contains("step_interval")) {
    out.step_interval = static_cast<Eigen::Index>(
        get_int(j["step_interval"], path + ".step_interval"));
  }
  if (j.contains("adiabatic_tolerance")) {
    out.adiabatic_tolerance = get_double(j["adiabatic_tolerance"], path + ".adiabatic_tolerance");
  }
  return out;
}

ProtocolConfig parse_protocol(const json& j, const std::string& path) {
  check_keys(j, path,
             {"variant", "bank", "noise", "samples_per_slot", "wire_resistance",
              "margin_epsilon", "max_slots", "table", "transient"});
  ProtocolConfig out;
  const std::string vname = get_string(require(j, path, "variant"), path + ".variant");
  const auto v = variant_from_name(vname);
  if (!v) fail(path + ".variant", "unknown variant '" + vname + "'");
  out.variant = *v;

  const json& bank = require(j, path, "bank");
  if (!bank.is_array()) fail(path + ".bank", "expected an array of resistances");
  std::vector<double> values;
  for (std::size_t k = 0; k < bank.size(); ++k) {
    values.push_back(get_double(bank[k], path + ".bank[" + std::to_string(k) + "]"));
  }
  try {
    out.bank = ResistorBank(std::move(values));
  } catch (const std::invalid_argument& e) {
    fail(path + ".bank", e.what());
  }

  const std::int64_t samples =
      get_int(require(j, path, "samples_per_slot"), path + ".samples_per_slot");
  if (samples < 2) fail(path + ".samples_per_slot", "expected an integer >= 2");
  out.samples_per_slot = static_cast<Eigen::Index>(samples);

  if (j.contains("noise")) out.params = parse_noise(j["noise"], path + ".noise");
  if (j.contains("wire_resistance")) {
    out.wire_resistance = get_double(j["wire_resistance"], path + ".wire_resistance");
  }
  if (j.contains("margin_epsilon")) {
    out.margin_epsilon = get_double(j["margin_epsilon"], path + ".margin_epsilon");
  }
  if (j.contains("max_slots")) {
    const std::int64_t m = get_int(j["max_slots"], path + ".max_slots");
    if (m < 1) fail(path + ".max_slots", "expected a positive integer");
    out.max_slots = static_cast<std::size_t>(m);
  }
  if (j.contains("table")) out.table_source = parse_table(j["table"], path + ".table");
  if (j.contains("transient")) out.transient = parse_transient(j["transient"], path + ".transient");
  return out;
}

EveModel parse_eve(const json& j, const std::string& path) {
  const std::string name = get_string(j, path);
  const auto m = eve_model_from_name(name);
  if (!m) fail(path, "unknown eavesdropper model '" + name + "'");
  return *m;
}

SimulateSpec parse_simulate(const json& j, const std::string& path) {
  check_keys(j, path, {"n_bits", "eve", "eve_window"});
  SimulateSpec out;
  if (j.contains("n_bits")) {
    const std::int64_t n = get_int(j["n_bits"], path + ".n_bits");
    if (n < 1) fail(path + ".n_bits", "expected a positive integer");
    out.n_bits = static_cast<std::size_t>(n);
  }
  if (j.contains("eve")) out.eve = parse_eve(j["eve"], path + ".eve");
  if (j.contains("eve_window")) {
    const std::int64_t w = get_int(j["eve_window"], path + ".eve_window");
    if (w < 0) fail(path + ".eve_window", "expected a non-negative integer");
    out.eve_window = static_cast<Eigen::Index>(w);
  }
  return out;
}

SweepSpec parse_sweep(const json& j, const std::string& path) {
  check_keys(j, path,
             {"parameter", "values", "variants", "slots_per_point", "eve", "eve_window",
              "slot_logs"});
  SweepSpec out;
  out.parameter = get_string(require(j, path, "parameter"), path + ".parameter");
  if (out.parameter == "variant") {
    if (j.contains("values")) fail(path + ".values", "variant sweeps use \"variants\"");
    const json& vs = require(j, path, "variants");
    if (!vs.is_array() || vs.empty()) fail(path + ".variants", "expected a non-empty array");
    for (std::size_t k = 0; k < vs.size(); ++k) {
      out.variant_values.push_back(
          get_string(vs[k], path + ".variants[" + std::to_string(k) + "]"));
    }
  } else {
    if (j.contains("variants")) fail(path + ".variants", "only valid for variant sweeps");
    const json& vs = require(j, path, "values");
    if (!vs.is_array() || vs.empty()) fail(path + ".values", "expected a non-empty array");
    for (std::size_t k = 0; k < vs.size(); ++k) {
      out.values.push_back(get_double(vs[k], path + ".values[" + std::to_string(k) + "]"));
    }
  }
  if (j.contains("slots_per_point")) {
    const std::int64_t s = get_int(j["slots_per_point"], path + ".slots_per_point");
    if (s < 1) fail(path + ".slots_per_point", "expected a positive integer");
    out.slots_per_point = static_cast<std::size_t>(s);
  }
  if (j.contains("eve")) out.eve = parse_eve(j["eve"], path + ".eve");
  if (j.contains("eve_window")) {
    const std::int64_t w = get_int(j["eve_window"], path + ".eve_window");
    if (w < 0) fail(path + ".eve_window", "expected a non-negative integer");
    out.eve_window = static_cast<Eigen::Index>(w);
  }
  if (j.contains("slot_logs")) {
    out.keep_slot_logs = get_bool(j["slot_logs"], path + ".slot_logs");
  }
  return out;
}

} // namespace

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j, "config", {"seed", "out_dir", "protocol", "simulate", "sweep"});
  RunConfig out;
  if (j.contains("seed")) out.seed = get_u64(j["seed"], "config.seed");
  if (j.contains("out_dir")) out.out_dir = get_string(j["out_dir"], "config.out_dir");
  out.protocol = parse_protocol(require(j, "config", "protocol"), "config.protocol");
  try {
    validate_config(out.protocol);
  } catch (const std::invalid_argument& e) {
    fail("config.protocol", e.what());
  }
  if (j.contains("simulate")) out.simulate = parse_simulate(j["simulate"], "config.simulate");
  if (j.contains("sweep")) {
    out.has_sweep = true;
    out.sweep = parse_sweep(j["sweep"], "config.sweep");
    out.sweep.base = out.protocol;
    out.sweep.root_seed = out.seed;
  }
  return out;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

} // namespace kljn
