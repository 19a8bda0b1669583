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

#include "unitts/nn/checkpoint.hpp"

#include <fstream>
#include <sstream>

namespace unitts::nn {

namespace {

constexpr std::uint8_t kVersion = 1;

void write_to(std::ostream& os, const Checkpoint& ck) {
  binio::write_magic(os, "UTCK");
  binio::write_u8(os, kVersion);
  binio::write_string(os, ck.kind);
  binio::write_string(os, ck.config_json);
  binio::write_u32(os, static_cast<std::uint32_t>(ck.params.size()));
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    const Matrix& m = ck.params[i].value();
    binio::write_string(os, ck.params.name(i));
    binio::write_u32(os, 2);
    binio::write_u32(os, static_cast<std::uint32_t>(m.rows()));
    binio::write_u32(os, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.size(); ++k) binio::write_f32(os, static_cast<float>(m.data()[k]));
  }
}

Checkpoint read_from(std::istream& is) {
  binio::expect_magic(is, "UTCK");
  const auto version = binio::read_u8(is);
  if (version != kVersion) throw ArtifactError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  ck.kind = binio::read_string(is);
  ck.config_json = binio::read_string(is);
  const std::uint32_t count = binio::read_u32(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = binio::read_string(is);
    if (binio::read_u32(is) != 2) throw ArtifactError("tensor '" + name + "' is not rank 2");
    const std::uint32_t rows = binio::read_u32(is);
    const std::uint32_t cols = binio::read_u32(is);
    Matrix m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = binio::read_f32(is);
    if (!m.allFinite()) throw ArtifactError("tensor '" + name + "' holds non-finite values");
    ck.params.add(std::move(name), std::move(m));
  }
  return ck;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ck) {
  std::ostringstream os(std::ios::binary);
  write_to(os, ck);
  return os.str();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  return read_from(is);
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArtifactError("cannot write checkpoint " + path);
  write_to(os, ck);
  if (!os) throw ArtifactError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArtifactError("cannot read checkpoint " + path);
  try {
    return read_from(is);
  } catch (const ArtifactError&) {
    throw;
  } catch (const Error& e) {
    throw ArtifactError(path + ": " + e.what());
  }
}

void assign_params(ParamStore& dst, const ParamStore& src) {
  if (dst.size() != src.size()) {
    throw ArtifactError("checkpoint holds " + std::to_string(src.size()) + " tensors, model expects " +
                        std::to_string(dst.size()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    std::size_t j = 0;
    try {
      j = src.index(dst.name(i));
    } catch (const InvalidInput&) {
      throw ArtifactError("checkpoint lacks tensor '" + dst.name(i) + "'");
    }
    const Matrix& v = src[j].value();
    if (v.rows() != dst[i].rows() || v.cols() != dst[i].cols()) {
      throw ArtifactError("shape mismatch for tensor '" + dst.name(i) + "'");
    }
    dst[i].mutable_value() = v;
  }
}

}  // namespace unitts::nn
