// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "east/heaviside.hpp"
#include "east/tensor.hpp"

namespace east::softset {

/// Point on the probability simplex: components in [0,1] summing to 1
/// within 1e-9. Validated on construction.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> components);
  const std::vector<double>& components() const { return c_; }
  std::size_t dim() const { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }

 private:
  std::vector<double> c_;
};

/// Class-membership degrees: entries in [0,1] summing to 1 within 1e-9.
/// One-hot vectors are the hard special case.
class SoftLabel {
 public:
  explicit SoftLabel(std::vector<double> memberships);
  static SoftLabel one_hot(std::size_t index, std::size_t d);
  const std::vector<double>& memberships() const { return m_; }
  std::size_t dim() const { return m_.size(); }
  double operator[](std::size_t i) const { return m_[i]; }

 private:
  std::vector<double> m_;
};

/// d x d nonnegative confusion mass. Rows are true classes, columns
/// predicted classes. Accumulated unscaled (total mass = example count);
/// scale() produces the 1/n form used by the concentration results.
struct SoftConfusionMatrix {
  std::size_t d = 0;
  std::vector<double> entries;  // row-major d*d
  double mass = 0.0;            // number of contributing examples (times any scale factor)

  static SoftConfusionMatrix zeros(std::size_t d);
  double& at(std::size_t i, std::size_t j) { return entries[i * d + j]; }
  double at(std::size_t i, std::size_t j) const { return entries[i * d + j]; }
  double total() const;
  double row_sum(std::size_t i) const;
  double col_sum(std::size_t j) const;
  double trace() const;
};

/// One-versus-rest cardinalities of a class (1-based k).
struct BinaryCardinalities {
  double tp = 0.0, fn = 0.0, fp = 0.0, tn = 0.0;
};

/// One-hot at the argmax; ties broken toward the lowest index.
SoftLabel predict_hard(const ProbVector& p);

/// Soft-set membership: the piecewise-linear step at the dynamic threshold,
/// L1-normalized. Preserves the argmax of p.
SoftLabel predict_soft(const ProbVector& p, heaviside::Temperature t);

/// Confusion-mass contribution of one example: row y (1-based) holds the
/// membership vector, all other rows are zero.
SoftConfusionMatrix phi(std::size_t y, const SoftLabel& yhat, std::size_t d);

/// Sum of per-example contributions. Serves both the hard matrix (one-hot
/// predictions) and the soft matrix.
SoftConfusionMatrix confusion(std::span<const int> labels, std::span<const SoftLabel> predictions,
                              std::size_t d);

/// Confusion accumulation from raw membership rows (row-major n x d), the
/// form the training loop and verification harness use.
SoftConfusionMatrix confusion_rows(std::span<const int> labels, const double* memberships,
                                   std::size_t n, std::size_t d);

BinaryCardinalities binary_cardinalities(const SoftConfusionMatrix& c, std::size_t k);

SoftConfusionMatrix scale(const SoftConfusionMatrix& c, double factor);

/// Batch forms over probability rows (n x d), used by the training loop
/// and the verification harness.
Tensor soft_membership_rows(const Tensor& probs, heaviside::Temperature t);
Tensor hard_membership_rows(const Tensor& probs);

}  // namespace east::softset
