#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "kljn/experiments.hpp"

using namespace kljn;

namespace {

ProtocolConfig classic_config() {
  ProtocolConfig cfg;
  cfg.variant = Variant::KLJN;
  cfg.bank = ResistorBank({1.0, 4.0});
  cfg.params = NoiseParams::unit();
  cfg.samples_per_slot = 1000;
  return cfg;
}

SlotRecord kept_record(int a, int b, int bit_a, int bit_b, double margin) {
  SlotRecord r;
  r.true_a = a;
  r.true_b = b;
  r.truth_secure = a != b;
  if (a != b) r.truth_bit = bit_a;
  r.far_a = b;
  r.far_b = a;
  r.bit_alice = bit_a;
  r.bit_bob = bit_b;
  r.kept = true;
  r.margin = margin;
  return r;
}

SlotRecord discarded_record(int a, int b, DiscardReason reason) {
  SlotRecord r;
  r.true_a = a;
  r.true_b = b;
  r.truth_secure = a != b;
  r.kept = false;
  r.reason = reason;
  return r;
}

} // namespace

TEST_CASE("eve model names round-trip and auto picks the strongest tap") {
  const EveModel all[] = {EveModel::None, EveModel::Auto, EveModel::PassiveIdeal,
                          EveModel::WireResistance, EveModel::ExactPairGuess};
  for (EveModel m : all) {
    const auto back = eve_model_from_name(eve_model_name(m));
    REQUIRE(back.has_value());
    CHECK(*back == m);
  }
  CHECK(!eve_model_from_name("Auto").has_value());

  ProtocolConfig cfg = classic_config();
  CHECK(resolve_eve_model(cfg, EveModel::Auto) == EveModel::PassiveIdeal);
  cfg.wire_resistance = 0.1;
  CHECK(resolve_eve_model(cfg, EveModel::Auto) == EveModel::WireResistance);
  cfg.variant = Variant::MKLJN;
  cfg.bank = geometric_bank(1.0, 4.0, 4);
  CHECK(resolve_eve_model(cfg, EveModel::Auto) == EveModel::ExactPairGuess);
  cfg.wire_resistance = 0.0;
  CHECK(resolve_eve_model(cfg, EveModel::Auto) == EveModel::PassiveIdeal);
  CHECK(resolve_eve_model(cfg, EveModel::None) == EveModel::None);
  CHECK(resolve_eve_model(cfg, EveModel::WireResistance) == EveModel::WireResistance);

  CHECK_THROWS_AS(make_eve_observer(cfg, EveModel::Auto, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_eve_observer(cfg, EveModel::None, 0), std::invalid_argument);
}

TEST_CASE("geometric bank pins the endpoints and spaces by ratio") {
  const ResistorBank b = geometric_bank(1.0, 4.0, 5);
  REQUIRE(b.n() == 5);
  CHECK(b.r_low() == 1.0);  // endpoints exact, not merely close
  CHECK(b.r_high() == 4.0);
  const double ratio = b.value(1) / b.value(0);
  for (int k = 1; k + 1 < b.n(); ++k) {
    CHECK(std::abs(b.value(k + 1) / b.value(k) / ratio - 1.0) <= 1e-9);
  }
  CHECK_THROWS_AS(geometric_bank(1.0, 4.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(geometric_bank(4.0, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(geometric_bank(0.0, 4.0, 3), std::invalid_argument);
}

TEST_CASE("true situation splits the insecure diagonal at the geometric midpoint") {
  const ResistorBank b = geometric_bank(1.0, 4.0, 4);
  CHECK(true_situation(b, 0, 1) == Situation::Mid);
  CHECK(true_situation(b, 0, 0) == Situation::LL);
  CHECK(true_situation(b, 1, 1) == Situation::LL); // 4^(1/3) < 2
  CHECK(true_situation(b, 2, 2) == Situation::HH);
  CHECK(true_situation(b, 3, 3) == Situation::HH);
}

TEST_CASE("binomial confidence interval covers the truth") {
  CHECK(binomial_ci_halfwidth(0.5, 0) == 0.0);
  CHECK(binomial_ci_halfwidth(0.5, 100) == doctest::Approx(1.96 * 0.05));

  RngStream root(81);
  const double p = 0.3;
  const std::size_t n = 200;
  int covered = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    RngStream ts = root.fork("trial", static_cast<std::uint64_t>(t));
    std::size_t hits = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (ts.uniform01() < p) ++hits;
    }
    const double p_hat = static_cast<double>(hits) / static_cast<double>(n);
    if (std::abs(p_hat - p) <= binomial_ci_halfwidth(p_hat, n)) ++covered;
  }
  CHECK(covered >= 930); // nominal 95%, slack for the p_hat plug-in
}

TEST_CASE("metrics aggregation folds the discard buckets") {
  const ResistorBank bank({1.0, 4.0});
  std::vector<SlotRecord> recs;
  recs.push_back(kept_record(1, 0, 1, 1, 0.4));
  recs.push_back(kept_record(0, 1, 0, 0, 0.6));
  recs.push_back(kept_record(1, 0, 1, 1, 0.5));
  recs.push_back(kept_record(0, 1, 0, 1, 0.5)); // the one honest mismatch
  recs.push_back(discarded_record(0, 0, DiscardReason::Insecure));
  recs.push_back(discarded_record(1, 1, DiscardReason::Insecure));
  recs.push_back(discarded_record(1, 1, DiscardReason::Insecure));
  recs.push_back(discarded_record(0, 1, DiscardReason::Inconclusive));
  recs.push_back(discarded_record(1, 0, DiscardReason::Inconsistent));
  recs.push_back(discarded_record(1, 0, DiscardReason::TransientCancel));

  // Eve saw four of the truth-secure slots and got three bits right.
  recs[0].eve_situation = Situation::Mid;
  recs[0].eve_bit = 1;
  recs[1].eve_situation = Situation::Mid;
  recs[1].eve_bit = 0;
  recs[2].eve_situation = Situation::LL; // wrong situation call
  recs[2].eve_bit = 0;
  recs[3].eve_situation = Situation::Mid;
  recs[3].eve_bit = 0;
  recs[4].eve_situation = Situation::LL; // correct on an insecure slot

  const MetricsRow row = aggregate_metrics(7, "r_w", "0.1", bank, recs, 42);
  CHECK(row.point_id == 7);
  CHECK(row.param_name == "r_w");
  CHECK(row.param_value == "0.1");
  CHECK(row.slots == 10);
  CHECK(row.seed == 42);
  CHECK(row.secure_fraction == doctest::Approx(0.4));
  CHECK(row.ber == doctest::Approx(0.25));
  CHECK(row.discard_insecure == doctest::Approx(0.3));
  CHECK(row.discard_inconclusive == doctest::Approx(0.3)); // folds the other reasons
  CHECK(row.eve_bit_success == doctest::Approx(0.75));
  CHECK(row.eve_bit_ci == doctest::Approx(binomial_ci_halfwidth(0.75, 4)));
  CHECK(row.eve_slot_acc == doctest::Approx(0.8)); // 4 of 5 observed situations
  CHECK(row.mean_margin == doctest::Approx(0.2));

  const MetricsRow empty = aggregate_metrics(0, "r_w", "0", bank, {}, 1);
  CHECK(empty.slots == 0);
  CHECK(empty.ber == 0.0);
  CHECK(empty.eve_bit_success == 0.0);
  CHECK(empty.mean_margin == 0.0);
}

TEST_CASE("metrics csv has a fixed header and deterministic fields") {
  const ResistorBank bank({1.0, 4.0});
  std::vector<SlotRecord> recs = {kept_record(1, 0, 1, 1, 0.25)};
  const MetricsRow row = aggregate_metrics(0, "samples_per_slot", "1000", bank, recs, 3);
  const std::string csv = metrics_csv({&row, 1});
  const std::string header =
      "point_id,param_name,param_value,slots,ber,secure_fraction,discard_inconclusive,"
      "discard_insecure,eve_bit_success,eve_bit_ci,eve_slot_acc,mean_margin,seed\n";
  REQUIRE(csv.size() > header.size());
  CHECK(csv.substr(0, header.size()) == header);
  CHECK(csv.substr(header.size()) == "0,samples_per_slot,1000,1,0,1,0,0,0.5,0,0,0.25,3\n");
}

TEST_CASE("slot log csv round-trips the per-slot fields") {
  SlotRecord r = kept_record(1, 0, 1, 1, 0.25);
  r.slot = 9;
  r.eve_situation = Situation::Mid;
  r.eve_bit = 1;
  r.eve_confidence = 0.75;
  r.eve_window = 128;
  const std::string csv = slot_log_csv({&r, 1});
  const std::string header =
      "slot,variant,true_a,true_b,truth_secure,truth_bit,far_a,far_b,bit_alice,bit_bob,"
      "kept,reason,margin,eve_situation,eve_bit,eve_confidence,eve_pair_a,eve_pair_b,"
      "eve_window\n";
  REQUIRE(csv.substr(0, header.size()) == header);
  CHECK(csv.substr(header.size()) == "9,KLJN,1,0,1,1,0,1,1,1,1,none,0.25,MID,1,0.75,,,128\n");

  SlotRecord d = discarded_record(0, 0, DiscardReason::Insecure);
  const std::string dcsv = slot_log_csv({&d, 1});
  // optional fields stay empty on a discarded slot
  CHECK(dcsv.substr(header.size()) == "0,KLJN,0,0,0,,-1,-1,,,0,insecure,0,,,0,,,0\n");
}

TEST_CASE("sweeps are deterministic and reject bad specs") {
  SweepSpec spec;
  spec.base = classic_config();
  spec.base.samples_per_slot = 400;
  spec.parameter = "samples_per_slot";
  spec.values = {200, 400};
  spec.slots_per_point = 60;
  spec.root_seed = 11;

  const SweepResult a = run_sweep(spec);
  const SweepResult b = run_sweep(spec);
  REQUIRE(a.rows.size() == 2);
  CHECK(metrics_csv(a.rows) == metrics_csv(b.rows));
  CHECK(a.rows[0].param_value == "200");
  CHECK(a.rows[1].param_value == "400");
  CHECK(a.rows[0].slots == 60);
  CHECK(a.rows[0].seed != a.rows[1].seed);
  CHECK(a.logs.empty());

  SweepSpec with_logs = spec;
  with_logs.keep_slot_logs = true;
  const SweepResult c = run_sweep(with_logs);
  REQUIRE(c.logs.size() == 2);
  CHECK(c.logs[0].size() == 60);
  CHECK(metrics_csv(c.rows) == metrics_csv(a.rows)); // logging does not disturb the run

  SweepSpec changed = spec;
  changed.root_seed = 12;
  CHECK(metrics_csv(run_sweep(changed).rows) != metrics_csv(a.rows));

  SweepSpec bad = spec;
  bad.parameter = "margin";
  CHECK_THROWS_AS(run_sweep(bad), std::runtime_error);
  bad = spec;
  bad.values.clear();
  CHECK_THROWS_AS(run_sweep(bad), std::runtime_error);
  bad = spec;
  bad.slots_per_point = 0;
  CHECK_THROWS_AS(run_sweep(bad), std::runtime_error);
  bad = spec;
  bad.values = {0.5, 400};
  CHECK_THROWS_AS(run_sweep(bad), std::runtime_error);
}

TEST_CASE("shorter slots starve the wire-resistance eavesdropper") {
  SweepSpec spec;
  spec.base = classic_config();
  spec.base.wire_resistance = 0.3;
  spec.parameter = "samples_per_slot";
  spec.values = {10000, 1000, 100};
  spec.slots_per_point = 2000;
  spec.root_seed = 13;

  const SweepResult res = run_sweep(spec);
  REQUIRE(res.rows.size() == 3);
  // listed from the longest slot down: Eve's bit success strictly decays
  CHECK(res.rows[0].eve_bit_success > res.rows[1].eve_bit_success);
  CHECK(res.rows[1].eve_bit_success > res.rows[2].eve_bit_success);
  CHECK(res.rows[0].eve_bit_success > 0.95);
  CHECK(res.rows[2].eve_bit_success < 0.80);
}

TEST_CASE("variant sweep adapts the bank and reaches every variant") {
  SweepSpec spec;
  spec.base = classic_config();
  spec.base.samples_per_slot = 600;
  spec.base.table_source.prior_key = {1, 0, 1, 1, 0, 1, 0, 0};
  spec.parameter = "variant";
  spec.variant_values = {"KLJN", "MKLJN", "KKLJN", "iKLJN"};
  spec.slots_per_point = 40;
  spec.root_seed = 14;

  const SweepResult res = run_sweep(spec);
  REQUIRE(res.rows.size() == 4);
  for (const MetricsRow& r : res.rows) {
    CHECK(r.param_name == "variant");
    CHECK(r.slots == 40);
  }
  CHECK(res.rows[1].param_value == "MKLJN");

  SweepSpec bad = spec;
  bad.variant_values = {"KLJN", "XKLJN"};
  CHECK_THROWS_AS(run_sweep(bad), std::runtime_error);
}

TEST_CASE("variant comparison shares the stream and checks compatibility") {
  std::vector<ProtocolConfig> configs;
  ProtocolConfig classic = classic_config();
  classic.samples_per_slot = 2000;
  configs.push_back(classic);
  ProtocolConfig multi = classic;
  multi.variant = Variant::MKLJN;
  multi.bank = geometric_bank(1.0, 4.0, 4);
  configs.push_back(multi);

  const auto rows = compare_variants(configs, 4000, 15);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].param_value == "KLJN");
  CHECK(rows[1].param_value == "MKLJN");
  CHECK(std::abs(rows[0].secure_fraction - 0.5) <= 0.03);
  CHECK(std::abs(rows[1].secure_fraction - 0.75) <= 0.03);
  CHECK(rows[0].ber == 0.0);
  CHECK(rows[1].ber == 0.0);

  std::vector<ProtocolConfig> mismatched = configs;
  mismatched[1].samples_per_slot = 500;
  CHECK_THROWS_AS(compare_variants(mismatched, 10, 15), std::runtime_error);
  mismatched = configs;
  mismatched[1].bank = geometric_bank(1.0, 8.0, 4);
  CHECK_THROWS_AS(compare_variants(mismatched, 10, 15), std::runtime_error);
  CHECK_THROWS_AS(compare_variants({}, 10, 15), std::runtime_error);
}

TEST_CASE("the prior key is what blocks Eve, not the pair identification") {
  // Same leak, same tap: the public-table run hands Eve the bit once she
  // identifies the pair; the keyed run leaves her at a coin.
  ProtocolConfig pub = classic_config();
  pub.samples_per_slot = 600;
  pub.wire_resistance = 0.3;
  ProtocolConfig keyed = pub;
  keyed.variant = Variant::KKLJN;
  keyed.table_source.keyed = true;
  keyed.table_source.prior_key = {1, 0, 0, 1, 1, 0, 1, 0};

  const std::vector<ProtocolConfig> configs = {pub, keyed};
  const auto rows = compare_variants(configs, 3000, 16, EveModel::ExactPairGuess, 0);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].eve_bit_success - rows[1].eve_bit_success > 0.2);
  CHECK(std::abs(rows[1].eve_bit_success - 0.5) <= 0.05);
}

TEST_CASE("fused decisions need no more samples than level-only decisions") {
  ProtocolConfig cfg = classic_config();
  const std::vector<Eigen::Index> grid = {8, 16, 32, 64, 128};
  const SpeedupBenchmark b = benchmark_decision_speedup(cfg, grid, 400, 0.02, 17);
  REQUIRE(b.grid.size() == 5);
  REQUIRE(b.err_level.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(b.err_fused[k] <= b.err_level[k] + 0.02);
  }
  if (b.required_level != 0 && b.required_fused != 0) {
    CHECK(b.required_fused <= b.required_level);
  }
  CHECK(b.trials == 400);

  CHECK_THROWS_AS(benchmark_decision_speedup(cfg, {}, 10, 0.1, 1), std::runtime_error);
  CHECK_THROWS_AS(benchmark_decision_speedup(cfg, grid, 0, 0.1, 1), std::runtime_error);
  CHECK_THROWS_AS(benchmark_decision_speedup(cfg, grid, 10, 0.0, 1), std::runtime_error);
  const std::vector<Eigen::Index> bad_grid = {1, 8};
  CHECK_THROWS_AS(benchmark_decision_speedup(cfg, bad_grid, 10, 0.1, 1), std::runtime_error);
}
