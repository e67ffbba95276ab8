// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "east/heaviside.hpp"
#include "east/tensor.hpp"

namespace east::diff {

/// Handle to a node in a Graph.
struct Value {
  std::size_t id = static_cast<std::size_t>(-1);
};

/// Dynamic reverse-mode tape over dense tensors. A graph is built forward
/// for one mini-batch, run backward once (or more; adjoints are reset), and
/// discarded. Not shared between threads.
class Graph {
 public:
  /// Leaf tensor; requires_grad marks trainable inputs.
  Value leaf(Tensor t, bool requires_grad);
  /// Leaf with requires_grad = false.
  Value constant(Tensor t);

  Value matmul(Value a, Value b);
  /// Elementwise add; also accepts a row vector broadcast over rows of a
  /// rank-2 left operand, or a scalar on either side.
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  /// Elementwise multiply; either side may be a scalar.
  Value mul(Value a, Value b);
  /// Elementwise divide; throws on a zero denominator entry.
  Value div(Value a, Value b);
  /// Divide with the denominator floored at eps. The floor also applies in
  /// the backward pass, so a clamped entry contributes no denominator
  /// gradient.
  Value div_guard(Value a, Value b, double eps);
  Value scale(Value a, double c);
  Value add_const(Value a, double c);
  Value relu(Value a);
  /// Multiply by a fixed dropout mask (entries 0 or 1/keep_prob).
  Value dropout_mask(Value a, Tensor mask);
  /// Row-wise softmax with max-subtraction stabilization.
  Value softmax_rows(Value a);
  Value sum(Value a);
  Value mean(Value a);
  Value pow(Value a, double exponent);
  /// Square root; tolerates entries down to -1e-9 (clamped to 0) to absorb
  /// roundoff, throws below that.
  Value sqrt(Value a);
  /// Natural log with the argument floored at 1e-12.
  Value log(Value a);
  /// Piecewise-linear step surrogate applied row-wise at each row's dynamic
  /// threshold tau_avg. With detach_tau the threshold is treated as a
  /// constant in the backward pass.
  Value heaviside_pl(Value p_rows, heaviside::Temperature t, bool detach_tau = false);
  /// Row-wise division by the row's L1 norm. Throws if a row norm falls
  /// below 1e-12.
  Value l1_normalize_rows(Value a);
  /// Copy `count` consecutive values starting at `offset` from a rank-1
  /// leaf into a tensor of the given shape. Gradients accumulate back into
  /// the source range.
  Value segment(Value flat, std::size_t offset, std::vector<std::size_t> shape);

  const Tensor& value(Value v) const;
  /// Reverse pass from a scalar root. Adjoints are zeroed first, so repeated
  /// calls on the same graph produce identical gradients.
  void backward(Value root);
  /// Adjoint of v after backward(); zero tensor if v was unreachable.
  const Tensor& grad(Value v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    kLeaf,
    kMatMul,
    kAdd,
    kMul,
    kDiv,
    kDivGuard,
    kScale,
    kAddConst,
    kRelu,
    kDropoutMask,
    kSoftmaxRows,
    kSum,
    kMean,
    kPow,
    kSqrt,
    kLog,
    kHeavisidePl,
    kL1NormalizeRows,
    kSegment,
  };

  struct Node {
    Op op;
    std::size_t in0 = kNone, in1 = kNone;
    Tensor value;
    Tensor adjoint;
    bool requires_grad = false;
    double c0 = 0.0;               // scale factor / exponent / eps / temperature
    bool flag = false;             // detach_tau
    Tensor aux;                    // op-specific forward byproducts
    std::vector<std::size_t> aux_idx;  // top-2 indices, segment offsets
  };

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  Value push(Node n);
  const Node& node(Value v) const;
  bool needs_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  void accumulate(std::size_t id, const Tensor& g);
  void backward_node(std::size_t id);

  std::vector<Node> nodes_;
};

/// Builds a scalar-valued graph from a leaf created for x.
using GraphBuilder = std::function<Value(Graph&, Value x)>;
/// Distance from x to the nearest non-smooth point of the builder's
/// function, when the caller can compute one.
using MarginFn = std::function<double(const Tensor&)>;

struct GradCheckComponent {
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
  bool flagged = false;
};

struct GradCheckReport {
  std::vector<GradCheckComponent> components;
  double max_rel_error = 0.0;
  std::size_t flagged_count = 0;
  bool skipped_near_breakpoint = false;
  std::string note;

  bool pass() const { return !skipped_near_breakpoint && flagged_count == 0; }
};

/// Compares the analytic gradient of fn at x against central finite
/// differences (f(x+eps e_i) - f(x-eps e_i)) / (2 eps), component by
/// component. If a margin function is given and reports x closer than
/// 2*eps to a breakpoint, the check is skipped and marked so.
GradCheckReport grad_check(const GraphBuilder& fn, const Tensor& x, double eps, double rel_tol,
                           const MarginFn& margin = nullptr);

}  // namespace east::diff
