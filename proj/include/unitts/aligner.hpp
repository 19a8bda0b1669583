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

#include <map>
#include <string>
#include <vector>

#include "unitts/common.hpp"
#include "unitts/corpus.hpp"
#include "unitts/features.hpp"
#include "unitts/text_frontend.hpp"

namespace unitts {

/// Frames per token; sums to the utterance frame count.
struct DurationSequence {
  std::vector<int> frames;

  std::size_t size() const { return frames.size(); }
  int total() const;
  void validate() const;
  bool operator==(const DurationSequence&) const = default;
};

/// Within-span SSE around the span mean, summed over a segmentation.
double segmentation_cost(const Matrix& frames, const std::vector<int>& durations);

/// Optimal split of the frames into n contiguous non-empty spans by dynamic
/// programming over (token, frame). Among equal-cost splits the earliest
/// boundaries win.
DurationSequence align(const FeatureSequence& f, int n_tokens);
DurationSequence align(const Matrix& frames, int n_tokens);

struct AlignmentBatch {
  std::map<std::string, DurationSequence> durations;
  std::vector<std::string> skipped;  // "<id>: <reason>"
};

AlignmentBatch align_corpus(const std::vector<Utterance>& utterances, const std::vector<FeatureSequence>& features,
                            const std::vector<TokenSequence>& tokens);

}  // namespace unitts
