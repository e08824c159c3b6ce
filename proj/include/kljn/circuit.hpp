#pragma once

#include "kljn/series.hpp"

namespace kljn {

// Single Kirchhoff loop: Alice's generator u_a behind r_a, Bob's u_b
// behind r_b, joined by the line. Sign convention used throughout:
// positive channel current flows from Bob's terminal toward Alice's,
//   i_ch = (u_b - u_a) / (r_a + r_b).

struct LoopSample {
  double u_a = 0;  // Alice generator voltage [V]
  double u_b = 0;  // Bob generator voltage [V]
  double u_ch = 0; // channel voltage [V]
  double i_ch = 0; // channel current [A]
};

struct LoopTrace {
  Series u_ch;
  Series i_ch;
};

struct EndpointSample {
  double u_end_a = 0; // line voltage at Alice's terminal [V]
  double u_end_b = 0; // line voltage at Bob's terminal [V]
  double i_ch = 0;
};

struct EndpointTrace {
  Series u_end_a;
  Series u_end_b;
  Series i_ch;
};

// Mean power each generator delivers into the opposite resistor, plus the
// <u_ch * i_ch> estimate. In a secure slot the two flows balance and the
// cross-correlation is zero.
struct PowerReport {
  double p_l_to_h = 0;   // from the low-resistor generator into R_high [W]
  double p_h_to_l = 0;   // reverse flow [W]
  double cross_corr = 0; // sample mean of u_ch * i_ch [W]
};

// Ideal line. u_ch = (u_a*r_b + u_b*r_a)/(r_a + r_b).
LoopSample solve_loop(double u_a, double u_b, double r_a, double r_b);
LoopTrace solve_loop(const SeriesRef& u_a, const SeriesRef& u_b, double r_a, double r_b);

// Lumped series wire resistance r_w between the terminals. Node voltages:
// u_end_a = u_a + i_ch*r_a, u_end_b = u_b - i_ch*r_b, so that
// u_end_b - u_end_a == i_ch*r_w. Reduces to solve_loop at r_w = 0.
EndpointSample solve_loop_nonideal(double u_a, double u_b, double r_a, double r_b, double r_w);
EndpointTrace solve_loop_nonideal(const SeriesRef& u_a, const SeriesRef& u_b, double r_a,
                                  double r_b, double r_w);

// Per-source power decomposition over a slot. The channel response is split
// by superposition into the two single-generator components (exact by
// linearity of the loop), so the series of each generator is required.
// u_low/u_high are the generator series behind r_low/r_high.
PowerReport measure_power_balance(const SeriesRef& u_low, const SeriesRef& u_high, double r_low,
                                  double r_high);

} // namespace kljn
