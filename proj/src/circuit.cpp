#include "kljn/circuit.hpp"

#include <cmath>
#include <stdexcept>

namespace kljn {

namespace {

void check_resistances(double r_a, double r_b) {
  if (!(r_a > 0) || !std::isfinite(r_a) || !(r_b > 0) || !std::isfinite(r_b))
    throw std::invalid_argument("solve_loop: resistances must be positive and finite");
}

void check_lengths(Eigen::Index a, Eigen::Index b, const char* who) {
  if (a != b) throw std::logic_error(std::string(who) + ": series length mismatch");
}

} // namespace

LoopSample solve_loop(double u_a, double u_b, double r_a, double r_b) {
  check_resistances(r_a, r_b);
  const double sum = r_a + r_b;
  return {u_a, u_b, (u_a * r_b + u_b * r_a) / sum, (u_b - u_a) / sum};
}

LoopTrace solve_loop(const SeriesRef& u_a, const SeriesRef& u_b, double r_a, double r_b) {
  check_resistances(r_a, r_b);
  check_lengths(u_a.size(), u_b.size(), "solve_loop");
  const double sum = r_a + r_b;
  LoopTrace out;
  out.u_ch = (u_a * r_b + u_b * r_a) / sum;
  out.i_ch = (u_b - u_a) / sum;
  return out;
}

EndpointSample solve_loop_nonideal(double u_a, double u_b, double r_a, double r_b, double r_w) {
  check_resistances(r_a, r_b);
  if (!(r_w >= 0) || !std::isfinite(r_w))
    throw std::invalid_argument("solve_loop_nonideal: r_w must be >= 0");
  const double i = (u_b - u_a) / (r_a + r_w + r_b);
  return {u_a + i * r_a, u_b - i * r_b, i};
}

EndpointTrace solve_loop_nonideal(const SeriesRef& u_a, const SeriesRef& u_b, double r_a,
                                  double r_b, double r_w) {
  check_resistances(r_a, r_b);
  if (!(r_w >= 0) || !std::isfinite(r_w))
    throw std::invalid_argument("solve_loop_nonideal: r_w must be >= 0");
  check_lengths(u_a.size(), u_b.size(), "solve_loop_nonideal");
  EndpointTrace out;
  out.i_ch = (u_b - u_a) / (r_a + r_w + r_b);
  out.u_end_a = u_a + out.i_ch * r_a;
  out.u_end_b = u_b - out.i_ch * r_b;
  return out;
}

PowerReport measure_power_balance(const SeriesRef& u_low, const SeriesRef& u_high, double r_low,
                                  double r_high) {
  check_resistances(r_low, r_high);
  check_lengths(u_low.size(), u_high.size(), "measure_power_balance");
  if (u_low.size() < 1) throw std::logic_error("measure_power_balance: empty trace");

  const double sum = r_low + r_high;
  // Single-generator loop currents; power delivered to the opposite resistor.
  PowerReport out;
  out.p_l_to_h = (u_low / sum).square().mean() * r_high;
  out.p_h_to_l = (u_high / sum).square().mean() * r_low;
  const LoopTrace full = solve_loop(u_low, u_high, r_low, r_high);
  out.cross_corr = (full.u_ch * full.i_ch).mean();
  return out;
}

} // namespace kljn
