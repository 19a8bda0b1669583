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

#include <cstdint>
#include <vector>

#include "unitts/nn/autograd.hpp"

namespace unitts::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Global gradient-norm clip; <= 0 disables.
  double clip_norm = 1.0;
};

class Adam {
 public:
  Adam(const ParamStore& params, AdamOptions opts);

  // Applies one update from the gradients currently held by `params`.
  // Returns the pre-clip global gradient norm.
  double step(ParamStore& params);
  std::uint64_t steps() const { return t_; }
  const AdamOptions& options() const { return opts_; }

 private:
  AdamOptions opts_;
  std::uint64_t t_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace unitts::nn
