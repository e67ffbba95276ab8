// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/softset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace east::softset {

namespace {

constexpr double kSumTol = 1e-9;
constexpr double kNormFloor = 1e-12;

void validate_unit_sum(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw std::invalid_argument(std::string(what) + ": empty vector");
  double sum = 0.0;
  for (double x : v) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw std::invalid_argument(std::string(what) + ": component " + std::to_string(x) +
                                  " outside [0,1]");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kSumTol) {
    throw std::invalid_argument(std::string(what) + ": components sum to " + std::to_string(sum) +
                                ", expected 1 within 1e-9");
  }
}

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

ProbVector::ProbVector(std::vector<double> components) : c_(std::move(components)) {
  validate_unit_sum(c_, "ProbVector");
}

SoftLabel::SoftLabel(std::vector<double> memberships) : m_(std::move(memberships)) {
  validate_unit_sum(m_, "SoftLabel");
}

SoftLabel SoftLabel::one_hot(std::size_t index, std::size_t d) {
  std::vector<double> m(d, 0.0);
  m.at(index) = 1.0;
  return SoftLabel(std::move(m));
}

SoftConfusionMatrix SoftConfusionMatrix::zeros(std::size_t d) {
  SoftConfusionMatrix c;
  c.d = d;
  c.entries.assign(d * d, 0.0);
  c.mass = 0.0;
  return c;
}

double SoftConfusionMatrix::total() const {
  double s = 0.0;
  for (double v : entries) s += v;
  return s;
}

double SoftConfusionMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) s += at(i, j);
  return s;
}

double SoftConfusionMatrix::col_sum(std::size_t j) const {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += at(i, j);
  return s;
}

double SoftConfusionMatrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += at(i, i);
  return s;
}

SoftLabel predict_hard(const ProbVector& p) {
  return SoftLabel::one_hot(argmax_lowest(p.components()), p.dim());
}

SoftLabel predict_soft(const ProbVector& p, heaviside::Temperature t) {
  std::vector<double> h = heaviside::heaviside_linear_vec(p.components(), t);
  double norm = 0.0;
  for (double v : h) norm += v;
  if (norm < kNormFloor) {
    throw std::runtime_error("predict_soft: L1 norm " + std::to_string(norm) + " below 1e-12");
  }
  for (double& v : h) v /= norm;
  return SoftLabel(std::move(h));
}

SoftConfusionMatrix phi(std::size_t y, const SoftLabel& yhat, std::size_t d) {
  if (y < 1 || y > d) {
    throw std::invalid_argument("phi: label " + std::to_string(y) + " outside 1.." +
                                std::to_string(d));
  }
  if (yhat.dim() != d) {
    throw std::invalid_argument("phi: membership size " + std::to_string(yhat.dim()) +
                                " does not match d=" + std::to_string(d));
  }
  SoftConfusionMatrix c = SoftConfusionMatrix::zeros(d);
  for (std::size_t j = 0; j < d; ++j) c.at(y - 1, j) = yhat[j];
  c.mass = 1.0;
  return c;
}

SoftConfusionMatrix confusion(std::span<const int> labels, std::span<const SoftLabel> predictions,
                              std::size_t d) {
  if (labels.empty()) throw std::invalid_argument("confusion: empty input");
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument("confusion: " + std::to_string(labels.size()) + " labels vs " +
                                std::to_string(predictions.size()) + " predictions");
  }
  SoftConfusionMatrix c = SoftConfusionMatrix::zeros(d);
  for (std::size_t e = 0; e < labels.size(); ++e) {
    const int y = labels[e];
    if (y < 1 || static_cast<std::size_t>(y) > d) {
      throw std::invalid_argument("confusion: label " + std::to_string(y) + " outside 1.." +
                                  std::to_string(d));
    }
    if (predictions[e].dim() != d) {
      throw std::invalid_argument("confusion: prediction " + std::to_string(e) + " has dim " +
                                  std::to_string(predictions[e].dim()));
    }
    for (std::size_t j = 0; j < d; ++j) c.at(y - 1, j) += predictions[e][j];
  }
  c.mass = static_cast<double>(labels.size());
  return c;
}

SoftConfusionMatrix confusion_rows(std::span<const int> labels, const double* memberships,
                                   std::size_t n, std::size_t d) {
  if (n == 0) throw std::invalid_argument("confusion: empty input");
  if (labels.size() != n) {
    throw std::invalid_argument("confusion: " + std::to_string(labels.size()) + " labels vs " +
                                std::to_string(n) + " rows");
  }
  SoftConfusionMatrix c = SoftConfusionMatrix::zeros(d);
  for (std::size_t e = 0; e < n; ++e) {
    const int y = labels[e];
    if (y < 1 || static_cast<std::size_t>(y) > d) {
      throw std::invalid_argument("confusion: label " + std::to_string(y) + " outside 1.." +
                                  std::to_string(d));
    }
    const double* row = memberships + e * d;
    double* crow = c.entries.data() + (y - 1) * d;
    for (std::size_t j = 0; j < d; ++j) crow[j] += row[j];
  }
  c.mass = static_cast<double>(n);
  return c;
}

BinaryCardinalities binary_cardinalities(const SoftConfusionMatrix& c, std::size_t k) {
  if (k < 1 || k > c.d) {
    throw std::invalid_argument("binary_cardinalities: class " + std::to_string(k) +
                                " outside 1.." + std::to_string(c.d));
  }
  const std::size_t ki = k - 1;
  BinaryCardinalities b;
  b.tp = c.at(ki, ki);
  for (std::size_t i = 0; i < c.d; ++i) {
    if (i == ki) continue;
    b.fn += c.at(ki, i);
    b.fp += c.at(i, ki);
    for (std::size_t j = 0; j < c.d; ++j) {
      if (j != ki) b.tn += c.at(i, j);
    }
  }
  return b;
}

SoftConfusionMatrix scale(const SoftConfusionMatrix& c, double factor) {
  if (!(factor > 0.0)) {
    throw std::invalid_argument("scale: factor must be positive, got " + std::to_string(factor));
  }
  SoftConfusionMatrix out = c;
  for (double& v : out.entries) v *= factor;
  out.mass = c.mass * factor;
  return out;
}

Tensor soft_membership_rows(const Tensor& probs, heaviside::Temperature t) {
  const std::size_t n = probs.rows(), d = probs.cols();
  Tensor out = probs;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> row(probs.values.data() + i * d, d);
    std::vector<double> h = heaviside::heaviside_linear_vec(row, t);
    double norm = 0.0;
    for (double v : h) norm += v;
    if (norm < kNormFloor) {
      throw std::runtime_error("soft_membership_rows: row " + std::to_string(i) + " L1 norm " +
                               std::to_string(norm) + " below 1e-12");
    }
    for (std::size_t j = 0; j < d; ++j) out.values[i * d + j] = h[j] / norm;
  }
  return out;
}

Tensor hard_membership_rows(const Tensor& probs) {
  const std::size_t n = probs.rows(), d = probs.cols();
  Tensor out = Tensor::zeros(probs.shape);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> row(probs.values.data() + i * d, d);
    out.values[i * d + argmax_lowest(row)] = 1.0;
  }
  return out;
}

}  // namespace east::softset
