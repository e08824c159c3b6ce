#include "kljn/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace kljn {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::KLJN: return "KLJN";
    case Variant::iKLJN: return "iKLJN";
    case Variant::MKLJN: return "MKLJN";
    case Variant::KKLJN: return "KKLJN";
    case Variant::KMKLJN: return "KMKLJN";
    case Variant::iMKLJN: return "iMKLJN";
    case Variant::iKKLJN: return "iKKLJN";
    case Variant::iKMKLJN: return "iKMKLJN";
  }
  return "?";
}

std::optional<Variant> variant_from_name(std::string_view name) {
  static constexpr Variant all[] = {Variant::KLJN,   Variant::iKLJN,  Variant::MKLJN,
                                    Variant::KKLJN,  Variant::KMKLJN, Variant::iMKLJN,
                                    Variant::iKKLJN, Variant::iKMKLJN};
  for (Variant v : all) {
    if (name == variant_name(v)) return v;
  }
  return std::nullopt;
}

bool variant_is_intelligent(Variant v) {
  return v == Variant::iKLJN || v == Variant::iMKLJN || v == Variant::iKKLJN ||
         v == Variant::iKMKLJN;
}

bool variant_is_keyed(Variant v) {
  return v == Variant::KKLJN || v == Variant::KMKLJN || v == Variant::iKKLJN ||
         v == Variant::iKMKLJN;
}

bool variant_is_multi(Variant v) {
  return v == Variant::MKLJN || v == Variant::KMKLJN || v == Variant::iMKLJN ||
         v == Variant::iKMKLJN;
}

const char* discard_reason_name(DiscardReason r) {
  switch (r) {
    case DiscardReason::None: return "none";
    case DiscardReason::Insecure: return "insecure";
    case DiscardReason::Inconclusive: return "inconclusive";
    case DiscardReason::Inconsistent: return "inconsistent";
    case DiscardReason::TransientCancel: return "transient_cancel";
  }
  return "?";
}

void validate_config(const ProtocolConfig& c) {
  const int n = c.bank.n();
  if (variant_is_multi(c.variant) && n <= 2) {
    throw std::invalid_argument(std::string(variant_name(c.variant)) +
                                " requires more than two resistors in the bank");
  }
  if (!variant_is_multi(c.variant) && n != 2) {
    throw std::invalid_argument(std::string(variant_name(c.variant)) +
                                " uses exactly the classic two-resistor bank");
  }
  if (variant_is_keyed(c.variant) &&
      (!c.table_source.keyed || c.table_source.prior_key.empty())) {
    throw std::invalid_argument(std::string(variant_name(c.variant)) +
                                " requires a keyed table source with a non-empty prior key");
  }
  if (c.samples_per_slot < 2) {
    throw std::invalid_argument("samples_per_slot must be at least 2");
  }
  if (!(c.wire_resistance >= 0) || !std::isfinite(c.wire_resistance)) {
    throw std::invalid_argument("wire_resistance must be finite and >= 0");
  }
  if (!(c.margin_epsilon >= 0)) {
    throw std::invalid_argument("margin_epsilon must be >= 0");
  }
  if (c.max_slots < 1) {
    throw std::invalid_argument("max_slots must be at least 1");
  }
  const double per_ohm = c.params.variance_per_ohm();
  if (!(per_ohm >= 0) || !std::isfinite(per_ohm)) {
    throw std::invalid_argument("noise parameters give an invalid generator variance");
  }
  if (c.transient.enabled) {
    if (!(c.transient.step_size > 0)) {
      throw std::invalid_argument("transient step_size must be positive");
    }
    if (c.transient.step_size > c.bank.r_high() - c.bank.r_low()) {
      throw std::invalid_argument("transient step_size exceeds the bank span");
    }
    if (c.transient.t_r < 0) {
      throw std::invalid_argument("transient t_r must be >= 0");
    }
    if (c.transient.step_interval < 1) {
      throw std::invalid_argument("transient step_interval must be >= 1");
    }
    if (!(c.transient.adiabatic_tolerance > 0)) {
      throw std::invalid_argument("transient adiabatic_tolerance must be positive");
    }
  }
}

ReducedTrace reduce_channel_noise(const SeriesRef& u_ch, const SeriesRef& i_local,
                                  const SeriesRef& own_series, double r_own,
                                  const Hypothesis& hyp) {
  if (u_ch.size() != own_series.size() || i_local.size() != own_series.size()) {
    throw std::logic_error("reduce_channel_noise: series length mismatch");
  }
  if (!(hyp.assumed_other_resistance > 0) || !std::isfinite(hyp.assumed_other_resistance)) {
    throw std::invalid_argument("reduce_channel_noise: hypothesis resistance must be positive");
  }
  if (!(r_own > 0) || !std::isfinite(r_own)) {
    throw std::invalid_argument("reduce_channel_noise: own resistance must be positive");
  }
  const double aprime = hyp.assumed_other_resistance / r_own;
  ReducedTrace out;
  out.u_star = u_ch - own_series * (aprime / (1.0 + aprime));
  out.i_star = i_local - own_series / (r_own * (1.0 + aprime));
  return out;
}

HypothesisResult hypothesis_test(const SeriesRef& own_series, const ReducedTrace& reduced,
                                 const Hypothesis& hyp) {
  HypothesisResult r;
  r.hypothesis = hyp;
  r.corr_u = cross_correlation(own_series, reduced.u_star);
  r.corr_i = cross_correlation(own_series, reduced.i_star);
  const double thr = independence_threshold(own_series.size());
  r.accepted = std::abs(r.corr_u.normalized) < thr && std::abs(r.corr_i.normalized) < thr;
  return r;
}

std::vector<Hypothesis> enumerate_hypotheses(int own_index, const ResistorBank& bank) {
  bank.value(own_index); // range check
  std::vector<Hypothesis> out;
  out.reserve(static_cast<std::size_t>(bank.n()));
  for (int j = 0; j < bank.n(); ++j) {
    out.push_back({bank.value(j), j});
  }
  return out;
}

IntelligentDecision decide_slot_intelligent(const CandidateClass& level,
                                            const std::vector<HypothesisResult>& results) {
  if (results.empty()) {
    throw std::logic_error("decide_slot_intelligent: no hypotheses evaluated");
  }
  IntelligentDecision d;
  int n_accepted = 0;
  int accepted = -1;
  for (const HypothesisResult& r : results) {
    if (r.accepted) {
      ++n_accepted;
      accepted = r.hypothesis.candidate_index;
    }
  }
  if (n_accepted != 1) {
    d.discard = DiscardReason::Inconclusive;
    return d;
  }
  d.accepted_index = accepted;
  if (level.index != accepted) {
    d.discard = DiscardReason::Inconsistent;
    return d;
  }
  d.far_index = accepted;
  return d;
}

namespace {

PartyDecision decide_party(const ProtocolConfig& cfg, const SlotTrace& tr, bool alice) {
  PartyDecision d;
  d.own_index = alice ? tr.r_a_index : tr.r_b_index;
  const double r_own = cfg.bank.value(d.own_index);
  const Series& u_obs = tr.nonideal ? (alice ? tr.u_end_a : tr.u_end_b) : tr.u_ch;
  const double ms_u = mean_square(u_obs);
  const double ms_i = mean_square(tr.i_ch);
  d.level = classify_far_resistor(ms_u, ms_i, r_own, cfg.bank.values(), cfg.params,
                                  cfg.wire_resistance);
  if (variant_is_intelligent(cfg.variant)) {
    const Series& own = alice ? tr.u_a : tr.u_b;
    // Party-local current: positive direction flows out of the party.
    Series negated;
    if (alice) negated = -tr.i_ch;
    const Series& i_local = alice ? negated : tr.i_ch;
    for (const Hypothesis& h : enumerate_hypotheses(d.own_index, cfg.bank)) {
      const ReducedTrace red = reduce_channel_noise(u_obs, i_local, own, r_own, h);
      d.hypotheses.push_back(hypothesis_test(own, red, h));
    }
    const IntelligentDecision dec = decide_slot_intelligent(d.level, d.hypotheses);
    d.accepted_index = dec.accepted_index;
    d.far_index = dec.far_index;
    d.discard = dec.discard;
  } else if (d.level.index < 0 || d.level.margin < cfg.margin_epsilon) {
    d.discard = DiscardReason::Inconclusive;
  } else {
    d.far_index = d.level.index;
  }
  if (d.discard == DiscardReason::None && d.far_index == d.own_index) {
    d.discard = DiscardReason::Insecure;
  }
  return d;
}

DiscardReason combine_discards(DiscardReason a, DiscardReason b) {
  if (a == DiscardReason::Insecure || b == DiscardReason::Insecure) {
    return DiscardReason::Insecure;
  }
  if (a == DiscardReason::Inconsistent || b == DiscardReason::Inconsistent) {
    return DiscardReason::Inconsistent;
  }
  return DiscardReason::Inconclusive;
}

SlotRecord make_record(std::size_t slot, const ProtocolConfig& cfg, const SlotResult& r) {
  SlotRecord rec;
  rec.slot = slot;
  rec.variant = cfg.variant;
  rec.true_a = r.truth.r_a_index;
  rec.true_b = r.truth.r_b_index;
  rec.truth_secure = r.truth.secure;
  rec.truth_bit = r.truth.bit;
  rec.far_a = r.outcome.alice.far_index;
  rec.far_b = r.outcome.bob.far_index;
  rec.bit_alice = r.outcome.bit_alice;
  rec.bit_bob = r.outcome.bit_bob;
  rec.kept = r.outcome.secure;
  rec.reason = r.outcome.discarded ? r.outcome.reason : DiscardReason::None;
  rec.margin = std::min(r.outcome.alice.level.margin, r.outcome.bob.level.margin);
  return rec;
}

} // namespace

SlotResult run_slot_forced(const ProtocolConfig& cfg, RngStream& slot_rng,
                           const TruthTable& table, int forced_a, int forced_b) {
  validate_config(cfg);
  if (table.n() != cfg.bank.n()) {
    throw std::logic_error("run_slot: truth table size does not match the bank");
  }
  const double r_a = cfg.bank.value(forced_a);
  const double r_b = cfg.bank.value(forced_b);

  SlotResult res;
  res.truth.r_a_index = forced_a;
  res.truth.r_b_index = forced_b;
  res.truth.secure = forced_a != forced_b;
  res.truth.bit = interpret(forced_a, forced_b, table);

  if (cfg.transient.enabled) {
    RngStream walk_rng = slot_rng.fork("walk");
    res.walk = run_transient_walk(cfg, cfg.transient, r_a, r_b, walk_rng);
    if (res.walk->cancel) {
      res.outcome.discarded = true;
      res.outcome.reason = DiscardReason::TransientCancel;
      res.outcome.alice.own_index = forced_a;
      res.outcome.bob.own_index = forced_b;
      return res;
    }
  }

  SlotTrace& tr = res.trace;
  tr.r_a_index = forced_a;
  tr.r_b_index = forced_b;
  RngStream na = slot_rng.fork("noise_a");
  RngStream nb = slot_rng.fork("noise_b");
  tr.u_a = sample_noise(r_a, cfg.params, cfg.samples_per_slot, na).samples;
  tr.u_b = sample_noise(r_b, cfg.params, cfg.samples_per_slot, nb).samples;
  if (cfg.wire_resistance > 0) {
    tr.nonideal = true;
    EndpointTrace e = solve_loop_nonideal(tr.u_a, tr.u_b, r_a, r_b, cfg.wire_resistance);
    tr.u_end_a = std::move(e.u_end_a);
    tr.u_end_b = std::move(e.u_end_b);
    tr.i_ch = std::move(e.i_ch);
    // Wire midpoint: the line voltage is affine along the wire, so the
    // middle sits at the endpoint average. This is the public channel view.
    tr.u_ch = 0.5 * (tr.u_end_a + tr.u_end_b);
  } else {
    LoopTrace l = solve_loop(tr.u_a, tr.u_b, r_a, r_b);
    tr.u_ch = std::move(l.u_ch);
    tr.i_ch = std::move(l.i_ch);
  }

  SlotOutcome& o = res.outcome;
  o.situation = classify_situation(mean_square(tr.u_ch), mean_square(tr.i_ch),
                                   predict_levels(cfg.bank.r_low(), cfg.bank.r_high(), cfg.params));
  o.alice = decide_party(cfg, tr, true);
  o.bob = decide_party(cfg, tr, false);
  if (o.alice.discard == DiscardReason::None) {
    o.alice.bit = table.bit(o.alice.own_index, o.alice.far_index);
  }
  if (o.bob.discard == DiscardReason::None) {
    o.bob.bit = table.bit(o.bob.far_index, o.bob.own_index);
  }
  if (o.alice.far_index >= 0) {
    o.hypothesis_accepted_alice = cfg.bank.value(o.alice.far_index);
  }
  if (o.bob.far_index >= 0) {
    o.hypothesis_accepted_bob = cfg.bank.value(o.bob.far_index);
  }
  if (o.alice.discard == DiscardReason::None && o.bob.discard == DiscardReason::None) {
    o.secure = true;
    o.bit_alice = o.alice.bit;
    o.bit_bob = o.bob.bit;
  } else {
    o.discarded = true;
    o.reason = combine_discards(o.alice.discard, o.bob.discard);
  }
  return res;
}

SlotResult run_slot(const ProtocolConfig& cfg, RngStream& slot_rng, const TruthTable& table) {
  validate_config(cfg);
  RngStream idx = slot_rng.fork("indices");
  const int a = idx.uniform_int(cfg.bank.n());
  const int b = idx.uniform_int(cfg.bank.n());
  return run_slot_forced(cfg, slot_rng, table, a, b);
}

namespace {

// One random-walk move: snap onto the target when already within half a
// step, otherwise a +-step with reflection at the bank edges. Either way
// |delta| <= step_size.
void advance_walk(double& r, double target, bool use_target, bool& done, double step, double lo,
                  double hi, RngStream& stream) {
  if (use_target && std::abs(r - target) <= 0.5 * step) {
    r = target;
    done = true;
    return;
  }
  double next = r + (stream.bit() ? step : -step);
  if (next > hi) next = 2.0 * hi - next;
  if (next < lo) next = 2.0 * lo - next;
  r = next;
}

} // namespace

WalkTrace run_transient_walk(const ProtocolConfig& config, const TransientConfig& tcfg,
                             double r_a_target, double r_b_target, RngStream& rng) {
  if (!(tcfg.step_size > 0)) {
    throw std::invalid_argument("run_transient_walk: step_size must be positive");
  }
  if (tcfg.t_r < 0) {
    throw std::invalid_argument("run_transient_walk: t_r must be >= 0");
  }
  if (tcfg.step_interval < 1) {
    throw std::invalid_argument("run_transient_walk: step_interval must be >= 1");
  }
  const double lo = config.bank.r_low();
  const double hi = config.bank.r_high();
  if (tcfg.step_size > hi - lo) {
    throw std::invalid_argument("run_transient_walk: step_size exceeds the bank span");
  }
  if (!tcfg.free_walk) {
    if (!(r_a_target >= lo && r_a_target <= hi && r_b_target >= lo && r_b_target <= hi)) {
      throw std::invalid_argument("run_transient_walk: target outside the bank range");
    }
  }

  const double start = 0.5 * (lo + hi);
  const Eigen::Index n = tcfg.t_r;
  WalkTrace w;
  w.r_a.resize(n);
  w.r_b.resize(n);
  double ra = start;
  double rb = start;
  bool a_done = !tcfg.free_walk && ra == r_a_target;
  bool b_done = !tcfg.free_walk && rb == r_b_target;
  RngStream steps_a = rng.fork("steps_a");
  RngStream steps_b = rng.fork("steps_b");
  for (Eigen::Index t = 0; t < n; ++t) {
    w.r_a[t] = ra;
    w.r_b[t] = rb;
    if ((t + 1) % tcfg.step_interval == 0) {
      if (!a_done) {
        advance_walk(ra, r_a_target, !tcfg.free_walk, a_done, tcfg.step_size, lo, hi, steps_a);
      }
      if (!b_done) {
        advance_walk(rb, r_b_target, !tcfg.free_walk, b_done, tcfg.step_size, lo, hi, steps_b);
      }
    }
  }
  RngStream noise_a = rng.fork("noise_a");
  RngStream noise_b = rng.fork("noise_b");
  w.noise_a = sample_noise_profile(w.r_a, config.params, noise_a);
  w.noise_b = sample_noise_profile(w.r_b, config.params, noise_b);
  if (tcfg.free_walk) {
    // No preselected targets: keep the endpoint values when the walks
    // ended far enough apart to be read as distinct bank levels.
    double min_gap = hi - lo;
    for (int k = 1; k < config.bank.n(); ++k) {
      min_gap = std::min(min_gap, config.bank.value(k) - config.bank.value(k - 1));
    }
    const bool keep = std::abs(ra - rb) >= 0.5 * min_gap;
    w.reached_a = keep;
    w.reached_b = keep;
    w.cancel = !keep;
  } else {
    w.reached_a = a_done;
    w.reached_b = b_done;
    w.cancel = !(a_done && b_done);
  }
  return w;
}

double worst_adiabatic_deviation(const SeriesRef& r, const SeriesRef& noise,
                                 const NoiseParams& params, int n_buckets,
                                 Eigen::Index min_samples) {
  if (r.size() != noise.size()) {
    throw std::logic_error("worst_adiabatic_deviation: series length mismatch");
  }
  if (r.size() == 0) {
    throw std::logic_error("worst_adiabatic_deviation: empty series");
  }
  if (n_buckets < 1) {
    throw std::invalid_argument("worst_adiabatic_deviation: need at least one bucket");
  }
  const double per_ohm = params.variance_per_ohm();
  const double rmin = r.minCoeff();
  const double rmax = r.maxCoeff();
  std::vector<double> sq(static_cast<std::size_t>(n_buckets), 0.0);
  std::vector<double> rs(static_cast<std::size_t>(n_buckets), 0.0);
  std::vector<Eigen::Index> cnt(static_cast<std::size_t>(n_buckets), 0);
  const double span = rmax - rmin;
  for (Eigen::Index t = 0; t < r.size(); ++t) {
    int k = span > 0 ? static_cast<int>((r[t] - rmin) / span * n_buckets) : 0;
    if (k >= n_buckets) k = n_buckets - 1;
    sq[k] += noise[t] * noise[t];
    rs[k] += r[t];
    ++cnt[k];
  }
  double worst = -1.0;
  for (int k = 0; k < n_buckets; ++k) {
    if (cnt[k] < min_samples || rs[k] <= 0) continue;
    worst = std::max(worst, std::abs(sq[k] / (per_ohm * rs[k]) - 1.0));
  }
  if (worst < 0) {
    // No bucket was populated enough; fall back to the pooled estimate.
    double all_sq = 0, all_r = 0;
    for (int k = 0; k < n_buckets; ++k) {
      all_sq += sq[k];
      all_r += rs[k];
    }
    if (all_r <= 0) {
      throw std::logic_error("worst_adiabatic_deviation: resistance profile sums to zero");
    }
    worst = std::abs(all_sq / (per_ohm * all_r) - 1.0);
  }
  return worst;
}

std::vector<SlotRecord> run_slots(const ProtocolConfig& cfg, std::size_t n_slots,
                                  RngStream& stream, const SlotObserver& observer) {
  validate_config(cfg);
  std::vector<SlotRecord> log;
  if (n_slots == 0) return log;
  const int n = cfg.bank.n();
  const TruthTable pub = build_public_table(n);
  std::optional<KeyedSchedule> sched;
  if (variant_is_keyed(cfg.variant)) {
    sched = derive_keyed_schedule(cfg.table_source.prior_key, n_slots, n);
  }
  log.reserve(n_slots);
  for (std::size_t s = 0; s < n_slots; ++s) {
    RngStream slot_rng = stream.fork("slot", s);
    const TruthTable& table = sched ? sched->table(s) : pub;
    const SlotResult r = run_slot(cfg, slot_rng, table);
    SlotRecord rec = make_record(s, cfg, r);
    if (observer) {
      RngStream eve_rng = slot_rng.fork("eve");
      observer(r, eve_rng, rec);
    }
    log.push_back(std::move(rec));
  }
  return log;
}

KeyExchangeResult run_key_exchange(const ProtocolConfig& cfg, std::size_t n_bits,
                                   std::uint64_t root_seed, const SlotObserver& observer) {
  validate_config(cfg);
  if (n_bits < 1) {
    throw std::invalid_argument("run_key_exchange: need at least one bit");
  }
  RngStream root(root_seed);
  const int n = cfg.bank.n();
  const TruthTable pub = build_public_table(n);
  std::optional<KeyedSchedule> sched;
  if (variant_is_keyed(cfg.variant)) {
    sched = derive_keyed_schedule(cfg.table_source.prior_key, cfg.max_slots, n);
  }
  KeyExchangeResult out;
  for (std::size_t s = 0; s < cfg.max_slots && out.key_alice.size() < n_bits; ++s) {
    RngStream slot_rng = root.fork("slot", s);
    const TruthTable& table = sched ? sched->table(s) : pub;
    const SlotResult r = run_slot(cfg, slot_rng, table);
    SlotRecord rec = make_record(s, cfg, r);
    if (observer) {
      RngStream eve_rng = slot_rng.fork("eve");
      observer(r, eve_rng, rec);
    }
    if (r.outcome.secure) {
      out.key_alice.push_back(*r.outcome.bit_alice);
      out.key_bob.push_back(*r.outcome.bit_bob);
    }
    out.log.push_back(std::move(rec));
    ++out.slots_run;
  }
  if (out.key_alice.size() < n_bits) {
    throw std::runtime_error(
        "run_key_exchange: max_slots exhausted before collecting the requested bits");
  }
  return out;
}

} // namespace kljn
