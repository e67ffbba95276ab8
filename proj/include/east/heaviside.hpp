// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace east::heaviside {

/// Sharpness parameter of the piecewise-linear step surrogate.
/// Valid range is (0, 0.4]; smaller values give a sharper step.
class Temperature {
 public:
  explicit Temperature(double value);
  double value() const { return value_; }

 private:
  double value_;
};

/// Derived quantities of the three-segment step surrogate at threshold tau:
/// the middle-band width tau_m = 5*T*min(tau, 1-tau) and the three slopes.
/// Denominators are floored at 1e-12 so the T = 0.4 boundary cannot divide
/// by zero.
struct ThresholdParams {
  double tau = 0.0;
  double tau_m = 0.0;
  double m1 = 0.0, m2 = 0.0, m3 = 0.0;

  static ThresholdParams make(double tau, Temperature t);
};

/// Mean of the two largest components of a probability vector. This is the
/// unique cut separating the argmax coordinate from all others.
double tau_avg(std::span<const double> p);

/// Indices of the largest and second-largest component; ties broken toward
/// the lower index. Single pass.
void top2(std::span<const double> p, std::size_t& first, std::size_t& second);

/// Exact step: 1 above tau, 0 below, 0.5 at the threshold.
double heaviside_hard(double x, double tau);

/// Three-segment continuous surrogate of the step. Anchored at (0,0),
/// (tau - tau_m/2, T), (tau, 0.5), (tau + tau_m/2, 1-T), (1,1).
double heaviside_linear(double p, double tau, Temperature t);

/// Partial derivatives of heaviside_linear with respect to p and tau.
/// Points on a segment boundary use the middle segment's expression.
struct PlGrad {
  double dp = 0.0;
  double dtau = 0.0;
};
PlGrad heaviside_linear_grad(double p, double tau, Temperature t);

/// Distance from p to the nearest breakpoint (tau and the two band edges).
double breakpoint_distance(double p, double tau, Temperature t);

/// heaviside_linear applied coordinate-wise at the shared dynamic threshold
/// tau_avg(p).
std::vector<double> heaviside_linear_vec(std::span<const double> p, Temperature t);

}  // namespace east::heaviside
