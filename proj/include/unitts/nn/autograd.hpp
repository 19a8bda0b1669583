// Copyright 2026 The unitts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal reverse-mode automatic differentiation over dense row-major
// matrices. Every op records a closure that pushes its output gradient into
// its inputs; backward() replays them in reverse topological order.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "unitts/common.hpp"

namespace unitts::nn {

struct Node {
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  // Zero-initialised on first use.
  Matrix& grad_buffer();
};

class Var {
 public:
  Var() = default;
  explicit Var(Matrix value, bool requires_grad = false);

  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  Matrix& grad() { return node_->grad_buffer(); }
  bool requires_grad() const { return node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double item() const;

  const std::shared_ptr<Node>& node() const { return node_; }
  bool defined() const { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<Node> node_;
};

/// Builds an op output. `fn` runs during backward with the output node; it
/// reads node.grad and accumulates into node.parents[i]->grad_buffer() for
/// parents that require gradients. No closure is kept when no input needs
/// gradients.
Var make_op(Matrix value, std::vector<Var> inputs, std::function<void(Node&)> fn);

/// Seeds d(loss)/d(loss) = 1 for a 1x1 loss and back-propagates.
void backward(const Var& loss);

Var constant(Matrix value);

Var matmul(const Var& a, const Var& b);
// a * b^T
Var matmul_nt(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
// Adds a 1 x C row to every row of a.
Var add_row(const Var& a, const Var& row);
Var scale(const Var& a, double s);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var tanh(const Var& a);
Var softmax_rows(const Var& a);
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var concat_cols(const std::vector<Var>& parts);
// Row i of the output is row ids[i] of the table.
Var gather_rows(const Var& table, std::span<const int> ids);
// Row i of x repeated counts[i] times, in order.
Var repeat_rows(const Var& x, std::span<const int> counts);
Var dropout(const Var& x, double rate, Rng* rng);

// "Same" 1-D convolution over time (rows). weight is (kernel * C_in) x C_out
// with tap k occupying rows [k*C_in, (k+1)*C_in); kernel must be odd.
Var conv1d(const Var& x, const Var& weight, const Var& bias, int kernel, int dilation = 1);
// Transposed convolution with output length T * stride. weight is
// C_in x (kernel * C_out); input row t contributes tap j to output row
// t * stride + j - (kernel - stride) / 2.
Var conv_transpose1d(const Var& x, const Var& weight, const Var& bias, int kernel, int stride);

// Mean cross-entropy of row-wise softmax(logits) against class targets.
Var cross_entropy(const Var& logits, std::span<const int> targets);
// Mean squared error against a constant target.
Var mse(const Var& a, const Matrix& target);
// Mean absolute error against a constant target.
Var l1(const Var& a, const Matrix& target);

/// Named parameters with value semantics: copying a store deep-copies the
/// tensors so a copied model never aliases the original.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore& other);
  ParamStore& operator=(const ParamStore& other);
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  std::size_t add(std::string name, Matrix init);
  const Var& operator[](std::size_t i) const { return vars_[i]; }
  Var& operator[](std::size_t i) { return vars_[i]; }
  std::size_t size() const { return vars_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  std::size_t index(const std::string& name) const;
  std::size_t element_count() const;

  void zero_grad();
  bool all_finite() const;
  // Rounds every value to the nearest float so f32 checkpoints are exact.
  void snap_to_f32();

 private:
  std::vector<std::string> names_;
  std::vector<Var> vars_;
};

// Initialisers.
Matrix uniform_init(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng);
Matrix normal_init(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);
// Glorot-uniform bound sqrt(6 / (fan_in + fan_out)).
Matrix xavier_init(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng);

}  // namespace unitts::nn
