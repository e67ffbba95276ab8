// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/heaviside.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace east::heaviside {

namespace {

constexpr double kDenomFloor = 1e-12;
constexpr double kSimplexTol = 1e-9;

void validate_prob_vector(std::span<const double> p) {
  if (p.size() < 2) {
    throw std::invalid_argument("tau_avg: need at least 2 components, got " +
                                std::to_string(p.size()));
  }
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("tau_avg: component " + std::to_string(v) +
                                  " outside [0,1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTol) {
    throw std::invalid_argument("tau_avg: components sum to " + std::to_string(sum) +
                                ", expected 1 within 1e-9");
  }
}

}  // namespace

Temperature::Temperature(double value) : value_(value) {
  if (!(value > 0.0 && value <= 0.4)) {
    throw std::invalid_argument("Temperature: value " + std::to_string(value) +
                                " outside (0, 0.4]");
  }
}

ThresholdParams ThresholdParams::make(double tau, Temperature t) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("ThresholdParams: tau " + std::to_string(tau) +
                                " outside (0,1)");
  }
  const double T = t.value();
  ThresholdParams tp;
  tp.tau = tau;
  tp.tau_m = 5.0 * T * std::min(tau, 1.0 - tau);
  tp.m1 = T / std::max(tau - tp.tau_m / 2.0, kDenomFloor);
  tp.m2 = (1.0 - 2.0 * T) / std::max(tp.tau_m, kDenomFloor);
  tp.m3 = T / std::max(1.0 - tau - tp.tau_m / 2.0, kDenomFloor);
  return tp;
}

double tau_avg(std::span<const double> p) {
  validate_prob_vector(p);
  std::size_t i1, i2;
  top2(p, i1, i2);
  return 0.5 * (p[i1] + p[i2]);
}

void top2(std::span<const double> p, std::size_t& first, std::size_t& second) {
  first = 0;
  second = 1;
  if (p[1] > p[0]) {
    first = 1;
    second = 0;
  }
  for (std::size_t i = 2; i < p.size(); ++i) {
    if (p[i] > p[first]) {
      second = first;
      first = i;
    } else if (p[i] > p[second]) {
      second = i;
    }
  }
}

double heaviside_hard(double x, double tau) {
  if (x > tau) return 1.0;
  if (x < tau) return 0.0;
  return 0.5;
}

double heaviside_linear(double p, double tau, Temperature t) {
  const ThresholdParams tp = ThresholdParams::make(tau, t);
  const double T = t.value();
  if (p < tau - tp.tau_m / 2.0) return p * tp.m1;
  if (p > tau + tp.tau_m / 2.0) return p * tp.m3 + (1.0 - T - tp.m3 * (tau + tp.tau_m / 2.0));
  return p * tp.m2 + (0.5 - tp.m2 * tau);
}

PlGrad heaviside_linear_grad(double p, double tau, Temperature t) {
  const ThresholdParams tp = ThresholdParams::make(tau, t);
  const double T = t.value();
  // d/dtau of min(tau, 1-tau); the tie at 0.5 takes the left branch.
  const double ds = tau <= 0.5 ? 1.0 : -1.0;
  const double half_band = tp.tau_m / 2.0;

  PlGrad g;
  if (p < tau - half_band) {
    const double denom = tau - half_band;
    const double ddenom = denom > kDenomFloor ? 1.0 - 2.5 * T * ds : 0.0;
    const double dm1 = -T * ddenom / (std::max(denom, kDenomFloor) * std::max(denom, kDenomFloor));
    g.dp = tp.m1;
    g.dtau = p * dm1;
  } else if (p > tau + half_band) {
    const double denom = 1.0 - tau - half_band;
    const double ddenom = denom > kDenomFloor ? -1.0 - 2.5 * T * ds : 0.0;
    const double dm3 = -T * ddenom / (std::max(denom, kDenomFloor) * std::max(denom, kDenomFloor));
    g.dp = tp.m3;
    g.dtau = dm3 * (p - tau - half_band) - tp.m3 * (1.0 + 2.5 * T * ds);
  } else {
    const double denom = tp.tau_m;
    const double ddenom = denom > kDenomFloor ? 5.0 * T * ds : 0.0;
    const double dm2 = -(1.0 - 2.0 * T) * ddenom /
                       (std::max(denom, kDenomFloor) * std::max(denom, kDenomFloor));
    g.dp = tp.m2;
    g.dtau = dm2 * (p - tau) - tp.m2;
  }
  return g;
}

double breakpoint_distance(double p, double tau, Temperature t) {
  const ThresholdParams tp = ThresholdParams::make(tau, t);
  const double half_band = tp.tau_m / 2.0;
  return std::min({std::abs(p - tau), std::abs(p - (tau - half_band)),
                   std::abs(p - (tau + half_band))});
}

std::vector<double> heaviside_linear_vec(std::span<const double> p, Temperature t) {
  const double tau = tau_avg(p);
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = heaviside_linear(p[i], tau, t);
  return out;
}

}  // namespace east::heaviside
