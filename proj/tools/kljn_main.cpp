// Command-line front end: simulate | sweep | verify.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kljn/experiments.hpp"
#include "kljn/run_config.hpp"
#include "kljn/verify.hpp"

namespace {

constexpr std::uint64_t kDefaultVerifySeed = 0x4B4C4A4E; // fixed, reproducible

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("short write to '" + path.string() + "'");
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::optional<std::string> out_dir, bool slot_log) {
  kljn::RunConfig rc = kljn::load_run_config(config_path);
  if (seed) rc.seed = *seed;
  if (out_dir) rc.out_dir = *out_dir;

  kljn::SlotObserver obs;
  const kljn::EveModel eve = kljn::resolve_eve_model(rc.protocol, rc.simulate.eve);
  if (eve != kljn::EveModel::None) {
    obs = kljn::make_eve_observer(rc.protocol, eve, rc.simulate.eve_window);
  }
  const kljn::KeyExchangeResult res =
      kljn::run_key_exchange(rc.protocol, rc.simulate.n_bits, rc.seed, obs);
  const kljn::MetricsRow row =
      kljn::aggregate_metrics(0, "n_bits", std::to_string(rc.simulate.n_bits),
                              rc.protocol.bank, res.log, rc.seed);

  std::filesystem::create_directories(rc.out_dir);
  const std::filesystem::path dir(rc.out_dir);
  write_file(dir / "metrics.csv", kljn::metrics_csv({&row, 1}));
  if (slot_log) write_file(dir / "slot_log.csv", kljn::slot_log_csv(res.log));

  std::printf("simulate: %zu bits in %zu slots (secure_fraction=%.4g, ber=%.4g, "
              "eve_bit_success=%.4g +- %.4g)\n",
              res.key_alice.size(), res.slots_run, row.secure_fraction, row.ber,
              row.eve_bit_success, row.eve_bit_ci);
  std::printf("simulate: wrote %s\n", (dir / "metrics.csv").string().c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, std::optional<std::uint64_t> seed,
              std::optional<std::string> out_dir, bool slot_log) {
  kljn::RunConfig rc = kljn::load_run_config(config_path);
  if (seed) rc.seed = *seed;
  if (out_dir) rc.out_dir = *out_dir;
  if (!rc.has_sweep) throw std::runtime_error("config: sweep: missing section");
  rc.sweep.root_seed = rc.seed;
  rc.sweep.keep_slot_logs = rc.sweep.keep_slot_logs || slot_log;

  const kljn::SweepResult res = kljn::run_sweep(rc.sweep);

  std::filesystem::create_directories(rc.out_dir);
  const std::filesystem::path dir(rc.out_dir);
  write_file(dir / "sweep.csv", kljn::metrics_csv(res.rows));
  for (std::size_t p = 0; p < res.logs.size(); ++p) {
    write_file(dir / ("slot_log_point" + std::to_string(p) + ".csv"),
               kljn::slot_log_csv(res.logs[p]));
  }
  std::printf("sweep: %zu points over '%s', %zu slots each\n", res.rows.size(),
              rc.sweep.parameter.c_str(), rc.sweep.slots_per_point);
  std::printf("sweep: wrote %s\n", (dir / "sweep.csv").string().c_str());
  return 0;
}

int cmd_verify(std::uint64_t seed, bool quick) {
  const auto checks = kljn::run_identity_checks(seed, quick);
  for (const kljn::CheckResult& c : checks) {
    std::printf("%s %-28s value=%-14.6g expected=%-12.6g tol=%-12.6g %s\n",
                c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.expected, c.tolerance,
                c.detail.c_str());
  }
  const bool ok = kljn::all_passed(checks);
  std::printf("verify: %s (%zu checks, seed %llu%s)\n", ok ? "all checks passed" : "FAILURES",
              checks.size(), static_cast<unsigned long long>(seed), quick ? ", quick" : "");
  return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulator for noise-based secure key exchange"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool slot_log = false;
  bool quick = false;
  std::uint64_t verify_seed = kDefaultVerifySeed;

  CLI::App* sim = app.add_subcommand("simulate", "Run one key exchange and write metrics");
  sim->add_option("--config", config_path, "JSON run configuration")->required();
  sim->add_option("--seed", seed, "Root seed override");
  sim->add_option("--out", out_dir, "Output directory override");
  sim->add_flag("--slot-log", slot_log, "Also write the per-slot log CSV");

  CLI::App* sweep = app.add_subcommand("sweep", "Run the configured parameter sweep");
  sweep->add_option("--config", config_path, "JSON run configuration")->required();
  sweep->add_option("--seed", seed, "Root seed override");
  sweep->add_option("--out", out_dir, "Output directory override");
  sweep->add_flag("--slot-log", slot_log, "Also write per-point slot log CSVs");

  CLI::App* verify = app.add_subcommand("verify", "Run the built-in identity checks");
  verify->add_option("--seed", verify_seed, "Seed for the check battery");
  verify->add_flag("--quick", quick, "Reduced sample counts, widened gates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, seed, out_dir, slot_log);
    if (sweep->parsed()) return cmd_sweep(config_path, seed, out_dir, slot_log);
    return cmd_verify(verify_seed, quick);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
