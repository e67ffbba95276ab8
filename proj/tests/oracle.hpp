// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference metrics computed straight from (label, prediction)
// pairs with one-versus-rest counting. Deliberately independent of the
// library's confusion-matrix code path; used only as a test oracle.

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

struct Counts {
  double tp = 0, fn = 0, fp = 0, tn = 0;
};

inline Counts count_ovr(const std::vector<int>& y, const std::vector<int>& yhat, int k) {
  Counts c;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool truth = y[i] == k;
    const bool pred = yhat[i] == k;
    if (truth && pred) c.tp += 1;
    if (truth && !pred) c.fn += 1;
    if (!truth && pred) c.fp += 1;
    if (!truth && !pred) c.tn += 1;
  }
  return c;
}

inline double precision(const Counts& c) { return c.tp + c.fp == 0 ? 0.0 : c.tp / (c.tp + c.fp); }
inline double recall(const Counts& c) { return c.tp + c.fn == 0 ? 0.0 : c.tp / (c.tp + c.fn); }

inline double f_beta(const Counts& c, double beta) {
  const double p = precision(c), r = recall(c);
  const double den = beta * beta * p + r;
  return den == 0.0 ? 0.0 : (1.0 + beta * beta) * p * r / den;
}

inline double macro_f_beta(const std::vector<int>& y, const std::vector<int>& yhat, int d,
                           const std::vector<double>& betas) {
  double sum = 0.0;
  for (int k = 1; k <= d; ++k) sum += f_beta(count_ovr(y, yhat, k), betas[k - 1]);
  return sum / d;
}

inline double accuracy(const std::vector<int>& y, const std::vector<int>& yhat) {
  double hits = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += y[i] == yhat[i] ? 1.0 : 0.0;
  return hits / static_cast<double>(y.size());
}

// Multiclass MCC as the correlation between one-hot indicator samples,
// accumulated per example rather than from a confusion matrix.
inline double mcc(const std::vector<int>& y, const std::vector<int>& yhat, int d) {
  const double n = static_cast<double>(y.size());
  double cov_xy = 0.0, cov_xx = 0.0, cov_yy = 0.0;
  for (int k = 1; k <= d; ++k) {
    double sx = 0.0, sy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double xi = yhat[i] == k ? 1.0 : 0.0;
      const double yi = y[i] == k ? 1.0 : 0.0;
      sx += xi;
      sy += yi;
      sxy += xi * yi;
    }
    cov_xy += sxy / n - sx * sy / (n * n);
    cov_xx += sx / n - sx * sx / (n * n);
    cov_yy += sy / n - sy * sy / (n * n);
  }
  if (cov_xx <= 0.0 || cov_yy <= 0.0) return 0.0;
  return cov_xy / std::sqrt(cov_xx * cov_yy);
}

// Binary MCC straight from the cardinalities, a third independent route.
inline double mcc_binary(const Counts& c) {
  const double den =
      std::sqrt((c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn));
  return den == 0.0 ? 0.0 : (c.tp * c.tn - c.fp * c.fn) / den;
}

}  // namespace oracle
