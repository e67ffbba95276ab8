// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace east {

namespace {

std::size_t shape_numel(const std::vector<std::size_t>& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> v)
    : shape(std::move(s)), values(std::move(v)) {
  if (shape_numel(shape) != values.size()) {
    throw std::invalid_argument("Tensor: value count " + std::to_string(values.size()) +
                                " does not match shape " + shape_str());
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, v));
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return Tensor({rows, cols}, std::move(v));
}

Tensor Tensor::vector(std::vector<double> v) {
  std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

std::size_t Tensor::rows() const {
  if (shape.size() == 2) return shape[0];
  if (shape.size() == 1) return 1;
  throw std::invalid_argument("Tensor: rows() on rank-" + std::to_string(shape.size()) +
                              " tensor " + shape_str());
}

std::size_t Tensor::cols() const {
  if (shape.size() == 2) return shape[1];
  if (shape.size() == 1) return shape[0];
  throw std::invalid_argument("Tensor: cols() on rank-" + std::to_string(shape.size()) +
                              " tensor " + shape_str());
}

bool Tensor::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dims mismatch " + a.shape_str() + "*" +
                                b.shape_str());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor c = Tensor::zeros({n, m});
  const double* pa = a.values.data();
  const double* pb = b.values.data();
  double* pc = c.values.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = pa + i * k;
    double* crow = pc + i * m;
    for (std::size_t l = 0; l < k; ++l) {
      const double av = arow[l];
      if (av == 0.0) continue;
      const double* brow = pb + l * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("matmul_nt: inner dims mismatch " + a.shape_str() + "*" +
                                b.shape_str() + "^T");
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  Tensor c = Tensor::zeros({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.values.data() + i * k;
    double* crow = c.values.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = b.values.data() + j * k;
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += arow[l] * brow[l];
      crow[j] = acc;
    }
  }
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("matmul_tn: inner dims mismatch " + a.shape_str() + "^T*" +
                                b.shape_str());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor c = Tensor::zeros({k, m});
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.values.data() + i * k;
    const double* brow = b.values.data() + i * m;
    for (std::size_t l = 0; l < k; ++l) {
      const double av = arow[l];
      if (av == 0.0) continue;
      double* crow = c.values.data() + l * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

}  // namespace east
