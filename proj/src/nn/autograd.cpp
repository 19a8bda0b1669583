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

#include "unitts/nn/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace unitts::nn {

Matrix& Node::grad_buffer() {
  if (grad.rows() != value.rows() || grad.cols() != value.cols()) grad = Matrix::Zero(value.rows(), value.cols());
  return grad;
}

Var::Var(Matrix value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

double Var::item() const {
  if (rows() != 1 || cols() != 1) throw InvalidInput("item() needs a 1x1 value");
  return node_->value(0, 0);
}

Var make_op(Matrix value, std::vector<Var> inputs, std::function<void(Node&)> fn) {
  Var out(std::move(value));
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in.requires_grad();
  if (needs) {
    auto& node = *out.node();
    node.requires_grad = true;
    node.parents.reserve(inputs.size());
    for (const auto& in : inputs) node.parents.push_back(in.node());
    node.backward_fn = std::move(fn);
  }
  return out;
}

void backward(const Var& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) throw InvalidInput("backward() needs a scalar loss");
  if (!loss.requires_grad()) return;
  // Iterative post-order DFS for a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  // Intermediate gradients start from zero on every pass.
  for (Node* n : order) {
    if (n->backward_fn) n->grad = Matrix::Zero(n->value.rows(), n->value.cols());
  }
  loss.node()->grad_buffer()(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

Var constant(Matrix value) { return Var(std::move(value), false); }

namespace {

bool wants(const Node& n, std::size_t i) { return n.parents[i]->requires_grad; }
Matrix& pgrad(Node& n, std::size_t i) { return n.parents[i]->grad_buffer(); }
const Matrix& pval(const Node& n, std::size_t i) { return n.parents[i]->value; }

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(what);
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix v(a.rows(), b.cols());
  v.noalias() = a.value() * b.value();
  return make_op(std::move(v), {a, b}, [](Node& n) {
    if (wants(n, 0)) pgrad(n, 0).noalias() += n.grad * pval(n, 1).transpose();
    if (wants(n, 1)) pgrad(n, 1).noalias() += pval(n, 0).transpose() * n.grad;
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  require(a.cols() == b.cols(), "matmul_nt: column counts differ");
  Matrix v(a.rows(), b.rows());
  v.noalias() = a.value() * b.value().transpose();
  return make_op(std::move(v), {a, b}, [](Node& n) {
    if (wants(n, 0)) pgrad(n, 0).noalias() += n.grad * pval(n, 1);
    if (wants(n, 1)) pgrad(n, 1).noalias() += n.grad.transpose() * pval(n, 0);
  });
}

Var add(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: shapes differ");
  return make_op(a.value() + b.value(), {a, b}, [](Node& n) {
    if (wants(n, 0)) pgrad(n, 0) += n.grad;
    if (wants(n, 1)) pgrad(n, 1) += n.grad;
  });
}

Var add_row(const Var& a, const Var& row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row: row shape mismatch");
  Matrix v = a.value();
  v.rowwise() += row.value().row(0);
  return make_op(std::move(v), {a, row}, [](Node& n) {
    if (wants(n, 0)) pgrad(n, 0) += n.grad;
    if (wants(n, 1)) pgrad(n, 1) += n.grad.colwise().sum();
  });
}

Var scale(const Var& a, double s) {
  return make_op(a.value() * s, {a}, [s](Node& n) { pgrad(n, 0) += n.grad * s; });
}

Var relu(const Var& a) {
  return make_op(a.value().cwiseMax(0.0), {a}, [](Node& n) {
    pgrad(n, 0).array() += (pval(n, 0).array() > 0.0).select(n.grad.array(), 0.0);
  });
}

Var leaky_relu(const Var& a, double slope) {
  Matrix v = (a.value().array() > 0.0).select(a.value().array(), slope * a.value().array());
  return make_op(std::move(v), {a}, [slope](Node& n) {
    pgrad(n, 0).array() += (pval(n, 0).array() > 0.0).select(n.grad.array(), slope * n.grad.array());
  });
}

Var tanh(const Var& a) {
  Matrix v = a.value().array().tanh().matrix();
  return make_op(std::move(v), {a}, [](Node& n) {
    pgrad(n, 0).array() += n.grad.array() * (1.0 - n.value.array().square());
  });
}

Var softmax_rows(const Var& a) {
  Matrix v = a.value();
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const double m = v.row(r).maxCoeff();
    v.row(r) = (v.row(r).array() - m).exp().matrix();
    v.row(r) /= v.row(r).sum();
  }
  return make_op(std::move(v), {a}, [](Node& n) {
    const Eigen::VectorXd dot = (n.grad.array() * n.value.array()).rowwise().sum();
    pgrad(n, 0).array() += n.value.array() * (n.grad.array().colwise() - dot.array());
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  require(gamma.rows() == 1 && gamma.cols() == x.cols() && beta.rows() == 1 && beta.cols() == x.cols(),
          "layer_norm: parameter shape mismatch");
  const Eigen::Index rows = x.rows(), cols = x.cols();
  Matrix xhat(rows, cols);
  Eigen::VectorXd inv_std(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = x.value().row(r).mean();
    const double var = (x.value().row(r).array() - mean).square().mean();
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.value().row(r).array() - mean) * inv_std[r];
  }
  Matrix v = xhat;
  v.array().rowwise() *= gamma.value().row(0).array();
  v.rowwise() += beta.value().row(0);
  return make_op(std::move(v), {x, gamma, beta}, [xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& n) {
    if (wants(n, 1)) pgrad(n, 1) += (n.grad.array() * xhat.array()).colwise().sum().matrix();
    if (wants(n, 2)) pgrad(n, 2) += n.grad.colwise().sum();
    if (wants(n, 0)) {
      Matrix dxhat = n.grad;
      dxhat.array().rowwise() *= pval(n, 1).row(0).array();
      const Eigen::VectorXd mean_d = dxhat.rowwise().mean();
      const Eigen::VectorXd mean_dx = (dxhat.array() * xhat.array()).rowwise().mean();
      Matrix dx = (dxhat.colwise() - mean_d) - (xhat.array().colwise() * mean_dx.array()).matrix();
      dx.array().colwise() *= inv_std.array();
      pgrad(n, 0) += dx;
    }
  });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols: range out of bounds");
  return make_op(a.value().middleCols(start, count), {a},
                 [start, count](Node& n) { pgrad(n, 0).middleCols(start, count) += n.grad; });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    require(p.rows() == parts.front().rows(), "concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix v(parts.front().rows(), cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    v.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return make_op(std::move(v), parts, [](Node& n) {
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < n.parents.size(); ++i) {
      const auto c = pval(n, i).cols();
      if (wants(n, i)) pgrad(n, i) += n.grad.middleCols(at, c);
      at += c;
    }
  });
}

Var gather_rows(const Var& table, std::span<const int> ids) {
  Matrix v(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && ids[i] < table.rows(), "gather_rows: id out of range");
    v.row(static_cast<Eigen::Index>(i)) = table.value().row(ids[i]);
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return make_op(std::move(v), {table}, [idx = std::move(idx)](Node& n) {
    auto& g = pgrad(n, 0);
    for (std::size_t i = 0; i < idx.size(); ++i) g.row(idx[i]) += n.grad.row(static_cast<Eigen::Index>(i));
  });
}

Var repeat_rows(const Var& x, std::span<const int> counts) {
  require(static_cast<Eigen::Index>(counts.size()) == x.rows(), "repeat_rows: one count per row required");
  Eigen::Index total = 0;
  for (int c : counts) {
    require(c >= 1, "repeat_rows: counts must be >= 1");
    total += c;
  }
  Matrix v(total, x.cols());
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (int k = 0; k < counts[i]; ++k) v.row(at++) = x.value().row(static_cast<Eigen::Index>(i));
  }
  std::vector<int> c(counts.begin(), counts.end());
  return make_op(std::move(v), {x}, [c = std::move(c)](Node& n) {
    auto& g = pgrad(n, 0);
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      g.row(static_cast<Eigen::Index>(i)) += n.grad.middleRows(at, c[i]).colwise().sum();
      at += c[i];
    }
  });
}

Var dropout(const Var& x, double rate, Rng* rng) {
  if (rng == nullptr || rate <= 0.0) return x;
  const double keep = 1.0 - rate;
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
  Matrix v = x.value().cwiseProduct(mask);
  return make_op(std::move(v), {x}, [mask = std::move(mask)](Node& n) { pgrad(n, 0) += n.grad.cwiseProduct(mask); });
}

namespace {

// col(t, k*C + c) = x(t + (k - half) * dilation, c), zero outside.
Matrix im2col(const Matrix& x, int kernel, int dilation) {
  const Eigen::Index t_len = x.rows(), c = x.cols();
  const int half = kernel / 2;
  Matrix col = Matrix::Zero(t_len, kernel * c);
  for (int k = 0; k < kernel; ++k) {
    const Eigen::Index shift = static_cast<Eigen::Index>(k - half) * dilation;
    const Eigen::Index lo = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index hi = std::min<Eigen::Index>(t_len, t_len - shift);
    if (hi > lo) col.block(lo, k * c, hi - lo, c) = x.middleRows(lo + shift, hi - lo);
  }
  return col;
}

void col2im_add(const Matrix& dcol, Matrix& dx, int kernel, int dilation) {
  const Eigen::Index t_len = dx.rows(), c = dx.cols();
  const int half = kernel / 2;
  for (int k = 0; k < kernel; ++k) {
    const Eigen::Index shift = static_cast<Eigen::Index>(k - half) * dilation;
    const Eigen::Index lo = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index hi = std::min<Eigen::Index>(t_len, t_len - shift);
    if (hi > lo) dx.middleRows(lo + shift, hi - lo) += dcol.block(lo, k * c, hi - lo, c);
  }
}

}  // namespace

Var conv1d(const Var& x, const Var& weight, const Var& bias, int kernel, int dilation) {
  require(kernel % 2 == 1, "conv1d: kernel must be odd");
  require(weight.rows() == kernel * x.cols(), "conv1d: weight rows must equal kernel * C_in");
  require(bias.rows() == 1 && bias.cols() == weight.cols(), "conv1d: bias shape mismatch");
  Matrix col = im2col(x.value(), kernel, dilation);
  Matrix v(x.rows(), weight.cols());
  v.noalias() = col * weight.value();
  v.rowwise() += bias.value().row(0);
  return make_op(std::move(v), {x, weight, bias}, [col = std::move(col), kernel, dilation](Node& n) {
    if (wants(n, 1)) pgrad(n, 1).noalias() += col.transpose() * n.grad;
    if (wants(n, 2)) pgrad(n, 2) += n.grad.colwise().sum();
    if (wants(n, 0)) {
      Matrix dcol(n.grad.rows(), pval(n, 1).rows());
      dcol.noalias() = n.grad * pval(n, 1).transpose();
      col2im_add(dcol, pgrad(n, 0), kernel, dilation);
    }
  });
}

Var conv_transpose1d(const Var& x, const Var& weight, const Var& bias, int kernel, int stride) {
  require(stride >= 1 && kernel >= stride, "conv_transpose1d: need kernel >= stride >= 1");
  require(weight.rows() == x.cols() && weight.cols() % kernel == 0, "conv_transpose1d: weight shape mismatch");
  const Eigen::Index c_out = weight.cols() / kernel;
  require(bias.rows() == 1 && bias.cols() == c_out, "conv_transpose1d: bias shape mismatch");
  const Eigen::Index t_in = x.rows();
  const Eigen::Index t_out = t_in * stride;
  const int pad = (kernel - stride) / 2;
  Matrix z(t_in, weight.cols());
  z.noalias() = x.value() * weight.value();
  Matrix v = Matrix::Zero(t_out, c_out);
  for (Eigen::Index t = 0; t < t_in; ++t) {
    for (int j = 0; j < kernel; ++j) {
      const Eigen::Index o = t * stride + j - pad;
      if (o >= 0 && o < t_out) v.row(o) += z.block(t, j * c_out, 1, c_out);
    }
  }
  v.rowwise() += bias.value().row(0);
  return make_op(std::move(v), {x, weight, bias}, [kernel, stride, pad, c_out](Node& n) {
    const Eigen::Index t_in = pval(n, 0).rows();
    const Eigen::Index t_out = n.grad.rows();
    if (wants(n, 2)) pgrad(n, 2) += n.grad.colwise().sum();
    Matrix dz = Matrix::Zero(t_in, kernel * c_out);
    for (Eigen::Index t = 0; t < t_in; ++t) {
      for (int j = 0; j < kernel; ++j) {
        const Eigen::Index o = t * stride + j - pad;
        if (o >= 0 && o < t_out) dz.block(t, j * c_out, 1, c_out) = n.grad.row(o);
      }
    }
    if (wants(n, 1)) pgrad(n, 1).noalias() += pval(n, 0).transpose() * dz;
    if (wants(n, 0)) pgrad(n, 0).noalias() += dz * pval(n, 1).transpose();
  });
}

Var cross_entropy(const Var& logits, std::span<const int> targets) {
  require(static_cast<Eigen::Index>(targets.size()) == logits.rows(), "cross_entropy: one target per row");
  require(logits.rows() > 0, "cross_entropy: empty input");
  const Eigen::Index rows = logits.rows();
  Matrix prob(rows, logits.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int y = targets[static_cast<std::size_t>(r)];
    require(y >= 0 && y < logits.cols(), "cross_entropy: target out of range");
    const double m = logits.value().row(r).maxCoeff();
    prob.row(r) = (logits.value().row(r).array() - m).exp().matrix();
    const double z = prob.row(r).sum();
    prob.row(r) /= z;
    loss += m + std::log(z) - logits.value()(r, y);
  }
  std::vector<int> t(targets.begin(), targets.end());
  Matrix v(1, 1);
  v(0, 0) = loss / static_cast<double>(rows);
  return make_op(std::move(v), {logits}, [prob = std::move(prob), t = std::move(t)](Node& n) {
    Matrix d = prob;
    for (std::size_t r = 0; r < t.size(); ++r) d(static_cast<Eigen::Index>(r), t[r]) -= 1.0;
    pgrad(n, 0) += d * (n.grad(0, 0) / static_cast<double>(t.size()));
  });
}

Var mse(const Var& a, const Matrix& target) {
  require(a.rows() == target.rows() && a.cols() == target.cols(), "mse: shape mismatch");
  Matrix diff = a.value() - target;
  Matrix v(1, 1);
  v(0, 0) = diff.squaredNorm() / static_cast<double>(diff.size());
  return make_op(std::move(v), {a}, [diff = std::move(diff)](Node& n) {
    pgrad(n, 0) += diff * (2.0 * n.grad(0, 0) / static_cast<double>(diff.size()));
  });
}

Var l1(const Var& a, const Matrix& target) {
  require(a.rows() == target.rows() && a.cols() == target.cols(), "l1: shape mismatch");
  Matrix sign = (a.value() - target).array().sign().matrix();
  Matrix v(1, 1);
  v(0, 0) = (a.value() - target).cwiseAbs().sum() / static_cast<double>(target.size());
  return make_op(std::move(v), {a}, [sign = std::move(sign)](Node& n) {
    pgrad(n, 0) += sign * (n.grad(0, 0) / static_cast<double>(sign.size()));
  });
}

// --- parameters --------------------------------------------------------

ParamStore::ParamStore(const ParamStore& other) : names_(other.names_) {
  vars_.reserve(other.vars_.size());
  for (const auto& v : other.vars_) vars_.emplace_back(v.value(), true);
}

ParamStore& ParamStore::operator=(const ParamStore& other) {
  if (this != &other) {
    ParamStore copy(other);
    *this = std::move(copy);
  }
  return *this;
}

std::size_t ParamStore::add(std::string name, Matrix init) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw InvalidInput("duplicate parameter name '" + name + "'");
  }
  names_.push_back(std::move(name));
  vars_.emplace_back(std::move(init), true);
  return vars_.size() - 1;
}

std::size_t ParamStore::index(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw InvalidInput("no parameter named '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t ParamStore::element_count() const {
  std::size_t n = 0;
  for (const auto& v : vars_) n += static_cast<std::size_t>(v.value().size());
  return n;
}

void ParamStore::zero_grad() {
  for (auto& v : vars_) v.grad().setZero();
}

bool ParamStore::all_finite() const {
  return std::all_of(vars_.begin(), vars_.end(), [](const Var& v) { return v.value().allFinite(); });
}

void ParamStore::snap_to_f32() {
  for (auto& v : vars_) v.mutable_value() = v.value().cast<float>().cast<double>();
}

Matrix uniform_init(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

Matrix normal_init(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = stddev * rng.normal();
  return m;
}

Matrix xavier_init(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  return uniform_init(rows, cols, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

}  // namespace unitts::nn
