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

#include <algorithm>
#include <cmath>

#include "unitts/t2u.hpp"

namespace unitts::testing {

// embed 8, one encoder and one decoder layer, K = 4, no dropout.
inline T2UConfig micro_t2u_config() {
  T2UConfig c;
  c.vocab_size = 6;
  c.num_units = 4;
  c.embed_dim = 8;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.heads = 2;
  c.dropout = 0.0;
  return c;
}

// N = 3 tokens over 6 frames.
inline T2UExample micro_t2u_example() {
  T2UExample ex;
  ex.tokens = {{2, 4, 3}, "L1"};
  ex.durations.frames = {1, 3, 2};
  ex.units.ids = {0, 2, 2, 1, 3, 3};
  return ex;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst_param;
};

// Analytic gradients of the combined loss against central differences,
// over every scalar of every parameter. Relative error per element is
// |a - n| / max(|a|, |n|, 1e-6).
inline GradCheck t2u_gradient_check(T2UModel& m, const T2UExample& ex, double lambda_dur, double step) {
  m.params().zero_grad();
  nn::backward(forward_train(m, ex, lambda_dur).total);
  std::vector<Matrix> analytic;
  for (std::size_t i = 0; i < m.params().size(); ++i) analytic.push_back(m.params()[i].grad());
  GradCheck r;
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    Matrix& w = m.params()[i].mutable_value();
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const double orig = w.data()[k];
      w.data()[k] = orig + step;
      const double up = forward_train(m, ex, lambda_dur).total.item();
      w.data()[k] = orig - step;
      const double down = forward_train(m, ex, lambda_dur).total.item();
      w.data()[k] = orig;
      const double n = (up - down) / (2 * step);
      const double a = analytic[i].data()[k];
      const double e = std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
      if (e > r.max_rel_error) {
        r.max_rel_error = e;
        r.worst_param = m.params().name(i);
      }
      ++r.checked;
    }
  }
  return r;
}

}  // namespace unitts::testing
