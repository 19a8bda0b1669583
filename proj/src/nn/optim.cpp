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

#include "unitts/nn/optim.hpp"

#include <cmath>

namespace unitts::nn {

Adam::Adam(const ParamStore& params, AdamOptions opts) : opts_(opts) {
  if (!(opts_.lr > 0.0)) throw InvalidInput("learning rate must be positive");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& v = params[i].value();
    m_.push_back(Matrix::Zero(v.rows(), v.cols()));
    v_.push_back(Matrix::Zero(v.rows(), v.cols()));
  }
}

double Adam::step(ParamStore& params) {
  if (params.size() != m_.size()) throw InvalidInput("optimizer/parameter count mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) sq += params[i].grad().squaredNorm();
  const double norm = std::sqrt(sq);
  const double clip = (opts_.clip_norm > 0.0 && norm > opts_.clip_norm) ? opts_.clip_norm / norm : 1.0;
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix g = params[i].grad() * clip;
    m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * g;
    v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * g.cwiseAbs2();
    auto& w = params[i].mutable_value();
    w.array() -= opts_.lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + opts_.eps);
  }
  return norm;
}

}  // namespace unitts::nn
