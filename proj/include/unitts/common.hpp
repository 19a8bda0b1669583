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
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace unitts {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Error categories. The CLI maps them onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition or malformed input data.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Missing, stale or mismatched pipeline artifact.
class ArtifactError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or parameters during training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Deterministic RNG. mt19937_64 output is fixed by the standard; the
// helpers below avoid the implementation-defined std distributions so
// that seeded runs reproduce across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double normal();

 private:
  std::mt19937_64 engine_;
};

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull);
std::string hex64(std::uint64_t v);

std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt);

// Little-endian binary helpers shared by the dump/checkpoint formats.
namespace binio {
void write_u8(std::ostream& os, std::uint8_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_f32(std::ostream& os, float v);
void write_string(std::ostream& os, std::string_view s);
void write_magic(std::ostream& os, std::string_view magic);

std::uint8_t read_u8(std::istream& is);
std::uint32_t read_u32(std::istream& is);
float read_f32(std::istream& is);
std::string read_string(std::istream& is);
void expect_magic(std::istream& is, std::string_view magic);
}  // namespace binio

// Splits UTF-8 text into codepoints (each returned as its byte string).
// Throws InvalidInput on malformed sequences.
std::vector<std::string> split_codepoints(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace unitts
