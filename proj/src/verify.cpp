#include "kljn/verify.hpp"

#include <cmath>
#include <cstdio>

#include "kljn/noise.hpp"
#include "kljn/protocol.hpp"
#include "kljn/stats.hpp"
#include "kljn/truthtable.hpp"

namespace kljn {

namespace {

CheckResult make_check(std::string name, double value, double expected, double tolerance,
                       std::string detail) {
  CheckResult c;
  c.name = std::move(name);
  c.value = value;
  c.expected = expected;
  c.tolerance = tolerance;
  c.detail = std::move(detail);
  c.pass = std::abs(value - expected) <= tolerance;
  return c;
}

// Relative 1-sigma error of a Gaussian mean-square estimate over n samples.
double ms_rel_sigma(Eigen::Index n) { return std::sqrt(2.0 / static_cast<double>(n)); }

CheckResult check_fdt_si(RngStream& st, Eigen::Index n, double z) {
  const NoiseParams params = NoiseParams::si(1.0e18, 500.0);
  const double ms = mean_square(sample_noise(1000.0, params, n, st).samples);
  const double expected = 27.61298;
  return make_check("fdt_variance_si", ms, expected, z * ms_rel_sigma(n) * expected,
                    "4kT_eff*R*df at R=1 kOhm, T_eff=1e18 K, df=500 Hz [V^2]");
}

CheckResult check_fdt_normalized(RngStream& st, Eigen::Index n, double z) {
  const NoiseParams params = NoiseParams::unit();
  const double ms = mean_square(sample_noise(4.0, params, n, st).samples);
  return make_check("fdt_variance_normalized", ms, 4.0, z * ms_rel_sigma(n) * 4.0,
                    "normalized units: generator variance equals its resistance");
}

CheckResult check_channel_levels(RngStream& st, Eigen::Index n, double z) {
  const NoiseParams params = NoiseParams::unit();
  // Frozen oracle: {ms_u, ms_i} for the pairs (1,1), (1,4), (4,4).
  const double pairs[3][2] = {{1.0, 1.0}, {1.0, 4.0}, {4.0, 4.0}};
  const double oracle[3][2] = {{0.5, 0.5}, {0.8, 0.2}, {2.0, 0.125}};
  double worst = 0;
  for (int k = 0; k < 3; ++k) {
    const Series u_a = sample_noise(pairs[k][0], params, n, st).samples;
    const Series u_b = sample_noise(pairs[k][1], params, n, st).samples;
    const LoopTrace lt = solve_loop(u_a, u_b, pairs[k][0], pairs[k][1]);
    worst = std::max(worst, std::abs(mean_square(lt.u_ch) / oracle[k][0] - 1.0));
    worst = std::max(worst, std::abs(mean_square(lt.i_ch) / oracle[k][1] - 1.0));
  }
  return make_check("channel_levels", worst, 0.0, z * ms_rel_sigma(n),
                    "worst relative deviation of the six channel mean-square levels");
}

CheckResult check_power_flow(RngStream& st, Eigen::Index n, double z, const LoopSolverFn& solver,
                             bool forward) {
  const NoiseParams params = NoiseParams::unit();
  const Series zero = Series::Zero(n);
  double value;
  if (forward) {
    const Series u_l = sample_noise(1.0, params, n, st).samples;
    const LoopTrace lt = solver(u_l, zero, 1.0, 4.0);
    // Positive current flows out of Bob; the low generator alone drives a
    // negative current, so the power it delivers is -<u_ch * i_ch>.
    value = -(lt.u_ch * lt.i_ch).mean();
  } else {
    const Series u_h = sample_noise(4.0, params, n, st).samples;
    const LoopTrace lt = solver(zero, u_h, 1.0, 4.0);
    value = (lt.u_ch * lt.i_ch).mean();
  }
  // Per-sample power is a scaled chi-square with sd sqrt(2) * mean.
  const double tol = z * std::sqrt(2.0) * 0.16 / std::sqrt(static_cast<double>(n));
  return make_check(forward ? "power_flow_forward" : "power_flow_reverse", value, 0.16, tol,
                    forward ? "low generator alone: P = -<u_ch*i_ch> = R_L R_H / rho^2"
                            : "high generator alone: P = +<u_ch*i_ch> = R_L R_H / rho^2");
}

CheckResult check_power_balance(RngStream& st, Eigen::Index n) {
  // The 2% gate needs a long slot: the imbalance estimate has relative
  // sigma 2/sqrt(n), so n = 4e5 puts the gate past six sigma.
  const NoiseParams params = NoiseParams::unit();
  const Series u_l = sample_noise(1.0, params, n, st).samples;
  const Series u_h = sample_noise(4.0, params, n, st).samples;
  const PowerReport pr = measure_power_balance(u_l, u_h, 1.0, 4.0);
  const double value = std::abs(pr.p_l_to_h - pr.p_h_to_l) / pr.p_l_to_h;
  return make_check("power_balance", value, 0.0, 0.02,
                    "relative imbalance of the two directed power flows");
}

CheckResult check_secure_cross_correlation(RngStream& st, Eigen::Index n, double z) {
  const NoiseParams params = NoiseParams::unit();
  const Series u_l = sample_noise(1.0, params, n, st).samples;
  const Series u_h = sample_noise(4.0, params, n, st).samples;
  const LoopTrace lt = solve_loop(u_l, u_h, 1.0, 4.0);
  const double value = std::abs(cross_correlation(lt.u_ch, lt.i_ch).normalized);
  return make_check("secure_cross_correlation", value, 0.0, independence_threshold(n, z),
                    "<u_ch*i_ch> vanishes in a secure slot");
}

CheckResult check_superposition(RngStream& st) {
  const Eigen::Index n = 10000;
  const NoiseParams params = NoiseParams::unit();
  const Series u_a = sample_noise(1.0, params, n, st).samples;
  const Series u_b = sample_noise(4.0, params, n, st).samples;
  const Series zero = Series::Zero(n);
  const LoopTrace full = solve_loop(u_a, u_b, 1.0, 4.0);
  const LoopTrace pa = solve_loop(u_a, zero, 1.0, 4.0);
  const LoopTrace pb = solve_loop(zero, u_b, 1.0, 4.0);
  const double scale_u = std::sqrt(mean_square(full.u_ch));
  const double scale_i = std::sqrt(mean_square(full.i_ch));
  const double dev_u = (pa.u_ch + pb.u_ch - full.u_ch).abs().maxCoeff() / scale_u;
  const double dev_i = (pa.i_ch + pb.i_ch - full.i_ch).abs().maxCoeff() / scale_i;
  return make_check("superposition", std::max(dev_u, dev_i), 0.0, 1e-9,
                    "single-generator responses add up to the full loop exactly");
}

CheckResult check_hypothesis_correct(RngStream& st, Eigen::Index n) {
  const NoiseParams params = NoiseParams::unit();
  // Bob holds R_L = 1, Alice R_H = 4; Bob tests the correct hypothesis.
  const Series u_a = sample_noise(4.0, params, n, st).samples;
  const Series u_b = sample_noise(1.0, params, n, st).samples;
  const LoopTrace lt = solve_loop(u_a, u_b, 4.0, 1.0);
  const Hypothesis hyp{4.0, 1};
  const ReducedTrace red = reduce_channel_noise(lt.u_ch, lt.i_ch, u_b, 1.0, hyp);
  const HypothesisResult res = hypothesis_test(u_b, red, hyp);
  const double value =
      std::max(std::abs(res.corr_u.normalized), std::abs(res.corr_i.normalized));
  CheckResult c = make_check("hypothesis_correct_accept", value, 0.0,
                             independence_threshold(n, 3.0),
                             "correct far-end hypothesis decorrelates the reduced signals");
  c.pass = res.accepted;
  return c;
}

CheckResult check_hypothesis_incorrect(RngStream& st, Eigen::Index n, double z) {
  const NoiseParams params = NoiseParams::unit();
  // True far/own ratio alpha = 4, hypothesized alpha' = 1. The residue is
  //   <u_own * i_star> = <u_own^2>/r_own * (1/(1+alpha) - 1/(1+alpha')).
  const Series u_a = sample_noise(4.0, params, n, st).samples;
  const Series u_b = sample_noise(1.0, params, n, st).samples;
  const LoopTrace lt = solve_loop(u_a, u_b, 4.0, 1.0);
  const Hypothesis hyp{1.0, 0};
  const ReducedTrace red = reduce_channel_noise(lt.u_ch, lt.i_ch, u_b, 1.0, hyp);
  const HypothesisResult res = hypothesis_test(u_b, red, hyp);
  const Series prod = u_b * red.i_star;
  const double sd = std::sqrt(std::max(mean_square(prod - prod.mean()), 0.0));
  const double expected = 1.0 / 5.0 - 1.0 / 2.0;
  CheckResult c = make_check("hypothesis_incorrect_corr", res.corr_i.raw, expected,
                             z * sd / std::sqrt(static_cast<double>(n)),
                             "wrong far-end hypothesis leaves the predicted current residue");
  c.pass = c.pass && !res.accepted;
  return c;
}

CheckResult check_degeneracy(RngStream& st, Eigen::Index n) {
  const NoiseParams params = NoiseParams::unit();
  const Series u_a = sample_noise(4.0, params, n, st).samples;
  const Series u_b = sample_noise(1.0, params, n, st).samples;
  const LoopTrace lt = solve_loop(u_a, u_b, 4.0, 1.0);
  // Even under a wrong hypothesis the reduced ratio u*/i* is -r_own.
  const Hypothesis hyp{1.0, 0};
  const ReducedTrace red = reduce_channel_noise(lt.u_ch, lt.i_ch, u_b, 1.0, hyp);
  const double guard = 1e-4 * std::sqrt(mean_square(red.i_star));
  double worst = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(red.i_star(k)) < guard) continue; // ratio is 0/0-ill near zero crossings
    worst = std::max(worst, std::abs(red.u_star(k) / red.i_star(k) + 1.0));
  }
  return make_check("degeneracy_ratio", worst, 0.0, 1e-9,
                    "u*/i* = -r_own under any hypothesis, so the ratio reveals nothing");
}

CheckResult check_truth_table() {
  int violations = 0;
  for (int n = 2; n <= 8; ++n) {
    const TruthTable t = build_public_table(n);
    const TruthTable f = t.flipped();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        if (t.bit(i, j) + t.bit(j, i) != 1) ++violations;
        if (f.bit(i, j) != 1 - t.bit(i, j)) ++violations;
        if (i + 1 < n && i + 1 != j && t.bit(i + 1, j) != 1 - t.bit(i, j)) ++violations;
        if (j + 1 < n && j + 1 != i && t.bit(i, j + 1) != 1 - t.bit(i, j)) ++violations;
      }
    }
  }
  if (build_public_table(2).bit(1, 0) != 1) ++violations; // classic orientation
  return make_check("truth_table_invariants", violations, 0.0, 0.0,
                    "antisymmetry, neighbor flips and the classic n=2 orientation");
}

CheckResult check_keyed_avalanche(RngStream& st) {
  const std::size_t n_slots = 1000;
  std::vector<int> key(16);
  for (int& b : key) b = st.bit() ? 1 : 0;
  std::vector<int> twin = key;
  twin[7] ^= 1;
  const KeyedSchedule s1 = derive_keyed_schedule(key, n_slots, 2);
  const KeyedSchedule s2 = derive_keyed_schedule(twin, n_slots, 2);
  std::size_t differ = 0;
  for (std::size_t k = 0; k < n_slots; ++k) {
    if (s1.flip(k) != s2.flip(k)) ++differ;
  }
  const double value = static_cast<double>(differ) / static_cast<double>(n_slots);
  return make_check("keyed_avalanche", value, 0.5, 0.05,
                    "one flipped key bit decorrelates about half the schedule");
}

CheckResult check_transient_start_and_bound(RngStream& st) {
  ProtocolConfig config;
  config.transient.enabled = true;
  config.transient.t_r = 5000;
  config.transient.step_size = 0.05;
  config.transient.step_interval = 1;
  const double lo = config.bank.r_low(), hi = config.bank.r_high();
  const WalkTrace walk = run_transient_walk(config, config.transient, lo, hi, st);
  int violations = 0;
  const double mid = 0.5 * (lo + hi);
  if (walk.r_a(0) != mid || walk.r_b(0) != mid) ++violations;
  const double eps = 1e-12;
  auto scan = [&](const Series& r, bool reached, double target) {
    for (Eigen::Index k = 0; k < r.size(); ++k) {
      if (r(k) < lo - eps || r(k) > hi + eps) ++violations;
      if (k > 0 && std::abs(r(k) - r(k - 1)) > config.transient.step_size + eps) ++violations;
    }
    if (reached && r(r.size() - 1) != target) ++violations;
  };
  scan(walk.r_a, walk.reached_a, lo);
  scan(walk.r_b, walk.reached_b, hi);
  return make_check("transient_start_and_bound", violations, 0.0, 0.0,
                    "walks start at the exact midpoint, stay in the bank span, move at "
                    "most one step per move and snap onto their targets");
}

CheckResult check_transient_tracking(RngStream& st, bool quick) {
  ProtocolConfig config;
  config.transient.enabled = true;
  config.transient.free_walk = true;
  config.transient.t_r = quick ? 50000 : 200000;
  config.transient.step_size = 0.05;
  config.transient.step_interval = 200;
  const double mid = 0.5 * (config.bank.r_low() + config.bank.r_high());
  const WalkTrace walk = run_transient_walk(config, config.transient, mid, mid, st);
  // Buckets below 2e4 samples would make the 5% gate a coin flip; thin
  // buckets fall back to the pooled estimate instead.
  const double value =
      worst_adiabatic_deviation(walk.r_a, walk.noise_a, config.params, 4, 20000);
  return make_check("transient_variance_tracking", value, 0.0,
                    config.transient.adiabatic_tolerance,
                    "generator variance follows R(t) through the walk");
}

} // namespace

std::vector<CheckResult> run_identity_checks(std::uint64_t seed, bool quick,
                                             LoopSolverFn solver) {
  if (!solver) {
    solver = [](const SeriesRef& u_a, const SeriesRef& u_b, double r_a, double r_b) {
      return solve_loop(u_a, u_b, r_a, r_b);
    };
  }
  const double z = quick ? 4.0 : 3.0;
  const Eigen::Index n_big = quick ? 100000 : 1000000;
  const Eigen::Index n_mid = quick ? 40000 : 200000;
  const Eigen::Index n_hyp = quick ? 20000 : 100000;
  RngStream root(seed);
  std::vector<CheckResult> out;
  {
    RngStream st = root.fork("fdt_si");
    out.push_back(check_fdt_si(st, n_big, z));
  }
  {
    RngStream st = root.fork("fdt_norm");
    out.push_back(check_fdt_normalized(st, n_big, z));
  }
  {
    RngStream st = root.fork("levels");
    out.push_back(check_channel_levels(st, n_mid, z));
  }
  {
    RngStream st = root.fork("power_fwd");
    out.push_back(check_power_flow(st, n_mid, z, solver, true));
  }
  {
    RngStream st = root.fork("power_rev");
    out.push_back(check_power_flow(st, n_mid, z, solver, false));
  }
  {
    RngStream st = root.fork("power_balance");
    out.push_back(check_power_balance(st, quick ? 400000 : 1000000));
  }
  {
    RngStream st = root.fork("secure_corr");
    out.push_back(check_secure_cross_correlation(st, n_mid, z));
  }
  {
    RngStream st = root.fork("superposition");
    out.push_back(check_superposition(st));
  }
  {
    RngStream st = root.fork("hyp_correct");
    out.push_back(check_hypothesis_correct(st, n_hyp));
  }
  {
    RngStream st = root.fork("hyp_incorrect");
    out.push_back(check_hypothesis_incorrect(st, n_hyp, z));
  }
  {
    RngStream st = root.fork("degeneracy");
    out.push_back(check_degeneracy(st, quick ? 20000 : 100000));
  }
  out.push_back(check_truth_table());
  {
    RngStream st = root.fork("avalanche");
    out.push_back(check_keyed_avalanche(st));
  }
  {
    RngStream st = root.fork("walk_bounds");
    out.push_back(check_transient_start_and_bound(st));
  }
  {
    RngStream st = root.fork("walk_tracking");
    out.push_back(check_transient_tracking(st, quick));
  }
  return out;
}

bool all_passed(std::span<const CheckResult> checks) {
  for (const CheckResult& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

} // namespace kljn
