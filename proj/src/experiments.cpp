#include "kljn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace kljn {

const char* eve_model_name(EveModel m) {
  switch (m) {
    case EveModel::None: return "none";
    case EveModel::Auto: return "auto";
    case EveModel::PassiveIdeal: return "passive_ideal";
    case EveModel::WireResistance: return "wire_resistance";
    case EveModel::ExactPairGuess: return "exact_pair_guess";
  }
  return "?";
}

std::optional<EveModel> eve_model_from_name(std::string_view name) {
  static constexpr EveModel all[] = {EveModel::None, EveModel::Auto, EveModel::PassiveIdeal,
                                     EveModel::WireResistance, EveModel::ExactPairGuess};
  for (EveModel m : all) {
    if (name == eve_model_name(m)) return m;
  }
  return std::nullopt;
}

EveModel resolve_eve_model(const ProtocolConfig& config, EveModel requested) {
  if (requested != EveModel::Auto) return requested;
  if (config.wire_resistance <= 0) return EveModel::PassiveIdeal;
  return config.bank.n() == 2 ? EveModel::WireResistance : EveModel::ExactPairGuess;
}

SlotObserver make_eve_observer(const ProtocolConfig& config, EveModel model,
                               Eigen::Index window) {
  if (model == EveModel::None || model == EveModel::Auto) {
    throw std::invalid_argument("make_eve_observer: resolve the model first");
  }
  const ResistorBank bank = config.bank;
  const NoiseParams params = config.params;
  const double r_w = config.wire_resistance;
  const bool keyed = variant_is_keyed(config.variant);
  const TruthTable pub = build_public_table(bank.n());
  const LevelTable levels = predict_levels(bank.r_low(), bank.r_high(), params);
  return [=](const SlotResult& res, RngStream& rng, SlotRecord& rec) {
    const SlotTrace& tr = res.trace;
    if (tr.i_ch.size() == 0) {
      return; // cancelled before any channel activity
    }
    const Eigen::Index w =
        window >= 1 ? std::min<Eigen::Index>(window, tr.i_ch.size()) : tr.i_ch.size();
    const Series& ua = tr.nonideal ? tr.u_end_a : tr.u_ch;
    const Series& ub = tr.nonideal ? tr.u_end_b : tr.u_ch;
    EveReport rep;
    switch (model) {
      case EveModel::PassiveIdeal:
        rep = eve_passive_ideal(tr.u_ch, tr.i_ch, levels, w, rng);
        break;
      case EveModel::WireResistance:
        rep = eve_wire_resistance(ua, ub, tr.i_ch, bank, params, tr.nonideal ? r_w : 0.0, w, rng);
        break;
      case EveModel::ExactPairGuess:
        rep = eve_exact_pair_guess(ua, ub, tr.i_ch, bank, params, tr.nonideal ? r_w : 0.0,
                                   keyed, pub, w, rng);
        break;
      default:
        return;
    }
    rec.eve_situation = rep.situation_guess;
    rec.eve_bit = rep.bit_guess;
    rec.eve_confidence = rep.confidence;
    rec.eve_window = rep.observed_window;
    if (rep.pair_guess) {
      rec.eve_pair_a = rep.pair_guess->first;
      rec.eve_pair_b = rep.pair_guess->second;
    }
    if (rec.truth_secure && !rec.eve_bit) {
      rec.eve_bit = rng.bit() ? 1 : 0;
    }
  };
}

double binomial_ci_halfwidth(double p_hat, std::size_t n) {
  if (n == 0) return 0.0;
  return 1.96 * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
}

Situation true_situation(const ResistorBank& bank, int a, int b) {
  if (a != b) return Situation::Mid;
  const double split = std::sqrt(bank.r_low() * bank.r_high());
  return bank.value(a) <= split ? Situation::LL : Situation::HH;
}

ResistorBank geometric_bank(double r_low, double r_high, int n) {
  if (n < 2) {
    throw std::invalid_argument("geometric_bank: need at least two resistors");
  }
  if (!(r_low > 0) || !(r_high > r_low)) {
    throw std::invalid_argument("geometric_bank: need 0 < r_low < r_high");
  }
  std::vector<double> values(static_cast<std::size_t>(n));
  const double ratio = r_high / r_low;
  for (int k = 0; k < n; ++k) {
    values[static_cast<std::size_t>(k)] =
        r_low * std::pow(ratio, static_cast<double>(k) / static_cast<double>(n - 1));
  }
  values.front() = r_low;
  values.back() = r_high;
  return ResistorBank(std::move(values));
}

MetricsRow aggregate_metrics(std::size_t point_id, std::string param_name,
                             std::string param_value, const ResistorBank& bank,
                             std::span<const SlotRecord> records, std::uint64_t seed) {
  MetricsRow row;
  row.point_id = point_id;
  row.param_name = std::move(param_name);
  row.param_value = std::move(param_value);
  row.slots = records.size();
  row.seed = seed;
  if (records.empty()) return row;

  std::size_t kept = 0, mismatched = 0, insecure = 0, inconclusive = 0;
  std::size_t eve_secure = 0, eve_hit = 0, eve_observed = 0, eve_situation_hit = 0;
  double margin_sum = 0;
  for (const SlotRecord& r : records) {
    margin_sum += r.margin;
    if (r.kept) {
      ++kept;
      if (r.bit_alice && r.bit_bob && *r.bit_alice != *r.bit_bob) ++mismatched;
    } else if (r.reason == DiscardReason::Insecure) {
      ++insecure;
    } else {
      ++inconclusive;
    }
    if (r.eve_situation) {
      ++eve_observed;
      if (*r.eve_situation == true_situation(bank, r.true_a, r.true_b)) ++eve_situation_hit;
    }
    if (r.truth_secure && r.eve_bit) {
      ++eve_secure;
      if (r.truth_bit && *r.eve_bit == *r.truth_bit) ++eve_hit;
    }
  }
  const double n_slots = static_cast<double>(records.size());
  row.ber = kept ? static_cast<double>(mismatched) / static_cast<double>(kept) : 0.0;
  row.secure_fraction = static_cast<double>(kept) / n_slots;
  row.discard_insecure = static_cast<double>(insecure) / n_slots;
  row.discard_inconclusive = static_cast<double>(inconclusive) / n_slots;
  row.eve_bit_success =
      eve_secure ? static_cast<double>(eve_hit) / static_cast<double>(eve_secure) : 0.5;
  row.eve_bit_ci = binomial_ci_halfwidth(row.eve_bit_success, eve_secure);
  row.eve_slot_acc = eve_observed
                         ? static_cast<double>(eve_situation_hit) / static_cast<double>(eve_observed)
                         : 0.0;
  row.mean_margin = margin_sum / n_slots;
  return row;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

ProtocolConfig apply_parameter(const SweepSpec& spec, std::size_t p) {
  ProtocolConfig cfg = spec.base;
  if (spec.parameter == "samples_per_slot") {
    const double v = spec.values.at(p);
    if (!(v >= 2) || v != std::floor(v)) {
      throw std::runtime_error("run_sweep: samples_per_slot values must be integers >= 2");
    }
    cfg.samples_per_slot = static_cast<Eigen::Index>(v);
  } else if (spec.parameter == "r_w") {
    const double v = spec.values.at(p);
    if (!(v >= 0)) {
      throw std::runtime_error("run_sweep: r_w values must be >= 0");
    }
    cfg.wire_resistance = v;
  } else if (spec.parameter == "n") {
    const double v = spec.values.at(p);
    if (!(v >= 2) || v != std::floor(v)) {
      throw std::runtime_error("run_sweep: n values must be integers >= 2");
    }
    cfg.bank = geometric_bank(spec.base.bank.r_low(), spec.base.bank.r_high(),
                              static_cast<int>(v));
  } else if (spec.parameter == "variant") {
    const auto v = variant_from_name(spec.variant_values.at(p));
    if (!v) {
      throw std::runtime_error("run_sweep: unknown variant '" + spec.variant_values.at(p) + "'");
    }
    cfg.variant = *v;
    if (variant_is_multi(*v) && cfg.bank.n() == 2) {
      cfg.bank = geometric_bank(cfg.bank.r_low(), cfg.bank.r_high(), 4);
    } else if (!variant_is_multi(*v) && cfg.bank.n() > 2) {
      cfg.bank = ResistorBank({cfg.bank.r_low(), cfg.bank.r_high()});
    }
    if (variant_is_keyed(*v)) {
      cfg.table_source.keyed = true; // prior key must come from the base config
    }
  } else {
    throw std::runtime_error("run_sweep: unknown swept parameter '" + spec.parameter + "'");
  }
  return cfg;
}

std::string value_string(const SweepSpec& spec, std::size_t p) {
  if (spec.parameter == "variant") return spec.variant_values.at(p);
  return fmt_double(spec.values.at(p));
}

std::vector<SlotRecord> run_point(const ProtocolConfig& cfg, std::size_t slots,
                                  RngStream& stream, EveModel eve, Eigen::Index window) {
  SlotObserver obs;
  const EveModel resolved = resolve_eve_model(cfg, eve);
  if (resolved != EveModel::None) {
    obs = make_eve_observer(cfg, resolved, window);
  }
  return run_slots(cfg, slots, stream, obs);
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec) {
  const bool by_variant = spec.parameter == "variant";
  const std::size_t n_points = by_variant ? spec.variant_values.size() : spec.values.size();
  if (n_points == 0) {
    throw std::runtime_error("run_sweep: empty value list");
  }
  if (spec.slots_per_point == 0) {
    throw std::runtime_error("run_sweep: slots_per_point must be positive");
  }

  RngStream root(spec.root_seed);
  std::vector<RngStream> streams;
  streams.reserve(n_points);
  for (std::size_t p = 0; p < n_points; ++p) {
    streams.push_back(root.fork("point", p));
  }

  // Points are independent; resolve configs up front so a bad spec fails
  // before any work is spent.
  std::vector<ProtocolConfig> configs;
  configs.reserve(n_points);
  for (std::size_t p = 0; p < n_points; ++p) {
    ProtocolConfig cfg = apply_parameter(spec, p);
    validate_config(cfg);
    configs.push_back(std::move(cfg));
  }

  std::vector<std::vector<SlotRecord>> logs(n_points);
  std::vector<std::exception_ptr> errors(n_points);
  const unsigned hw = std::thread::hardware_concurrency();
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(hw ? hw : 1, n_points));
  auto body = [&](std::size_t p) {
    try {
      logs[p] = run_point(configs[p], spec.slots_per_point, streams[p], spec.eve,
                          spec.eve_window);
    } catch (...) {
      errors[p] = std::current_exception();
    }
  };
  if (workers <= 1) {
    for (std::size_t p = 0; p < n_points; ++p) body(p);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t p = next.fetch_add(1); p < n_points; p = next.fetch_add(1)) {
          body(p);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  for (std::size_t p = 0; p < n_points; ++p) {
    if (errors[p]) std::rethrow_exception(errors[p]);
  }

  SweepResult out;
  out.rows.reserve(n_points);
  for (std::size_t p = 0; p < n_points; ++p) {
    out.rows.push_back(aggregate_metrics(p, spec.parameter, value_string(spec, p),
                                         configs[p].bank, logs[p], streams[p].key()));
  }
  if (spec.keep_slot_logs) {
    out.logs = std::move(logs);
  }
  return out;
}

std::vector<MetricsRow> compare_variants(std::span<const ProtocolConfig> configs,
                                         std::size_t slots, std::uint64_t seed, EveModel eve,
                                         Eigen::Index eve_window) {
  if (configs.empty()) {
    throw std::runtime_error("compare_variants: no configurations given");
  }
  for (const ProtocolConfig& c : configs) {
    if (c.bank.r_low() != configs[0].bank.r_low() ||
        c.bank.r_high() != configs[0].bank.r_high()) {
      throw std::runtime_error("compare_variants: banks must share the same span");
    }
    if (c.samples_per_slot != configs[0].samples_per_slot) {
      throw std::runtime_error("compare_variants: samples_per_slot must match");
    }
  }
  std::vector<MetricsRow> rows;
  rows.reserve(configs.size());
  for (std::size_t k = 0; k < configs.size(); ++k) {
    // Every variant replays the same root stream, so the noise draws line
    // up wherever the banks have the same size.
    RngStream stream(seed);
    const auto records = run_point(configs[k], slots, stream, eve, eve_window);
    rows.push_back(aggregate_metrics(k, "variant", variant_name(configs[k].variant),
                                     configs[k].bank, records, stream.key()));
  }
  return rows;
}

namespace {

int level_argmin(double ms_u, double ms_i, double r_own, const ResistorBank& bank,
                 const NoiseParams& params) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < bank.n(); ++j) {
    const PairLevels lv = pair_levels(r_own, bank.value(j), params);
    const double du = std::log(ms_u) - std::log(lv.ms_u);
    const double di = std::log(ms_i) - std::log(lv.ms_i);
    const double d = du * du + di * di;
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

int fused_argmin(const Series& u_ch, const Series& i_local, const Series& own, double r_own,
                 const ResistorBank& bank, const NoiseParams& params) {
  const double n = static_cast<double>(own.size());
  int best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (int j = 0; j < bank.n(); ++j) {
    const Hypothesis hyp{bank.value(j), j};
    const ReducedTrace red = reduce_channel_noise(u_ch, i_local, own, r_own, hyp);
    const double r_far = hyp.assumed_other_resistance;
    const double rho = r_far + r_own;
    const double var_j = params.variance_per_ohm() * r_far * r_own * r_own / (rho * rho);
    const double score = n * std::log(var_j) + red.u_star.square().sum() / var_j;
    if (score < best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

} // namespace

SpeedupBenchmark benchmark_decision_speedup(const ProtocolConfig& config,
                                            std::span<const Eigen::Index> grid,
                                            std::size_t trials, double target_error,
                                            std::uint64_t seed) {
  if (grid.empty()) {
    throw std::runtime_error("benchmark_decision_speedup: empty sample grid");
  }
  if (trials == 0) {
    throw std::runtime_error("benchmark_decision_speedup: need at least one trial");
  }
  if (!(target_error > 0 && target_error < 1)) {
    throw std::runtime_error("benchmark_decision_speedup: target error must be in (0,1)");
  }
  SpeedupBenchmark out;
  out.grid.assign(grid.begin(), grid.end());
  out.trials = trials;
  RngStream root(seed);
  for (std::size_t gi = 0; gi < out.grid.size(); ++gi) {
    const Eigen::Index n_samples = out.grid[gi];
    if (n_samples < 2) {
      throw std::runtime_error("benchmark_decision_speedup: grid entries must be >= 2");
    }
    RngStream gs = root.fork("grid", gi);
    std::size_t err_l = 0, err_f = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      RngStream ts = gs.fork("trial", t);
      RngStream idx = ts.fork("indices");
      const int a = idx.uniform_int(config.bank.n());
      const int b = idx.uniform_int(config.bank.n());
      const double r_a = config.bank.value(a);
      const double r_b = config.bank.value(b);
      RngStream na = ts.fork("noise_a");
      RngStream nb = ts.fork("noise_b");
      const Series u_a = sample_noise(r_a, config.params, n_samples, na).samples;
      const Series u_b = sample_noise(r_b, config.params, n_samples, nb).samples;
      const LoopTrace loop = solve_loop(u_a, u_b, r_a, r_b);
      // Bob's inference of Alice's resistor; his local current is i_ch.
      const double ms_u = loop.u_ch.square().mean();
      const double ms_i = loop.i_ch.square().mean();
      if (level_argmin(ms_u, ms_i, r_b, config.bank, config.params) != a) ++err_l;
      if (fused_argmin(loop.u_ch, loop.i_ch, u_b, r_b, config.bank, config.params) != a) ++err_f;
    }
    out.err_level.push_back(static_cast<double>(err_l) / static_cast<double>(trials));
    out.err_fused.push_back(static_cast<double>(err_f) / static_cast<double>(trials));
  }
  for (std::size_t gi = 0; gi < out.grid.size(); ++gi) {
    if (out.required_level == 0 && out.err_level[gi] <= target_error) {
      out.required_level = out.grid[gi];
    }
    if (out.required_fused == 0 && out.err_fused[gi] <= target_error) {
      out.required_fused = out.grid[gi];
    }
  }
  return out;
}

namespace {

void append_optional_int(std::ostringstream& os, const std::optional<int>& v) {
  if (v) os << *v;
}

} // namespace

std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::ostringstream os;
  os << "point_id,param_name,param_value,slots,ber,secure_fraction,discard_inconclusive,"
        "discard_insecure,eve_bit_success,eve_bit_ci,eve_slot_acc,mean_margin,seed\n";
  for (const MetricsRow& r : rows) {
    os << r.point_id << ',' << r.param_name << ',' << r.param_value << ',' << r.slots << ','
       << fmt_double(r.ber) << ',' << fmt_double(r.secure_fraction) << ','
       << fmt_double(r.discard_inconclusive) << ',' << fmt_double(r.discard_insecure) << ','
       << fmt_double(r.eve_bit_success) << ',' << fmt_double(r.eve_bit_ci) << ','
       << fmt_double(r.eve_slot_acc) << ',' << fmt_double(r.mean_margin) << ',' << r.seed
       << '\n';
  }
  return os.str();
}

std::string slot_log_csv(std::span<const SlotRecord> records) {
  std::ostringstream os;
  os << "slot,variant,true_a,true_b,truth_secure,truth_bit,far_a,far_b,bit_alice,bit_bob,"
        "kept,reason,margin,eve_situation,eve_bit,eve_confidence,eve_pair_a,eve_pair_b,"
        "eve_window\n";
  for (const SlotRecord& r : records) {
    os << r.slot << ',' << variant_name(r.variant) << ',' << r.true_a << ',' << r.true_b << ','
       << (r.truth_secure ? 1 : 0) << ',';
    append_optional_int(os, r.truth_bit);
    os << ',' << r.far_a << ',' << r.far_b << ',';
    append_optional_int(os, r.bit_alice);
    os << ',';
    append_optional_int(os, r.bit_bob);
    os << ',' << (r.kept ? 1 : 0) << ',' << discard_reason_name(r.reason) << ','
       << fmt_double(r.margin) << ',';
    if (r.eve_situation) os << situation_name(*r.eve_situation);
    os << ',';
    append_optional_int(os, r.eve_bit);
    os << ',' << fmt_double(r.eve_confidence) << ',';
    append_optional_int(os, r.eve_pair_a);
    os << ',';
    append_optional_int(os, r.eve_pair_b);
    os << ',' << r.eve_window << '\n';
  }
  return os.str();
}

} // namespace kljn
