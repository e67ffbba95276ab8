// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace east {

/// Dense real tensor in row-major order. Rank 1 and 2 cover everything in
/// this library; the shape vector is kept general anyway.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> v);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double v);
  static Tensor scalar(double v);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v);
  static Tensor vector(std::vector<double> v);

  std::size_t numel() const { return values.size(); }
  bool is_scalar() const { return values.size() == 1; }
  std::size_t rank() const { return shape.size(); }

  // Rank-2 accessors. A rank-1 tensor of length n is treated as 1 x n where
  // a row view is needed (bias vectors, single probability rows).
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t i, std::size_t j) { return values[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;
  std::string shape_str() const;
};

// C = A * B for rank-2 operands (n x k)(k x m).
Tensor matmul(const Tensor& a, const Tensor& b);
// C = A * B^T, i.e. C[i,j] = sum_l A[i,l] * B[j,l].
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// C = A^T * B, i.e. C[l,j] = sum_i A[i,l] * B[i,j].
Tensor matmul_tn(const Tensor& a, const Tensor& b);

}  // namespace east
