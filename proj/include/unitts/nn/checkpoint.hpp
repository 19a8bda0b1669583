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

#include <string>

#include "unitts/nn/autograd.hpp"

namespace unitts::nn {

// Container shared by the T2U and vocoder checkpoints: magic "UTCK",
// version u8, kind string, config JSON string, tensor count u32, then per
// tensor its name, rank u32 (always 2), dims u32 each and f32 LE data.
struct Checkpoint {
  std::string kind;
  std::string config_json;
  ParamStore params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);
std::string encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(const std::string& bytes);

// Copies tensor values from `src` into `dst` by name; shapes must match.
void assign_params(ParamStore& dst, const ParamStore& src);

}  // namespace unitts::nn
