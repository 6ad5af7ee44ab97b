// Copyright 2026 The NGCC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NGCC_SNIPPETS_H_
#define NGCC_SNIPPETS_H_

#include <cstdint>
#include <string>
#include <vector>

namespace ngcc {

enum class Split { kTrain, kValidation, kTest };

const char* SplitName(Split split);

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
};

// Source signals grouped by speaker. Every speaker belongs to exactly one
// split. Synthetic stores generate snippets on demand from the seed; WAV
// stores hold the decoded audio.
class SnippetStore {
 public:
  struct SyntheticOptions {
    std::uint64_t seed = 0;
    std::size_t speakers = 50;
    std::size_t snippets_per_speaker = 50;
    double snippet_seconds = 2.0;
    double sample_rate = 16000.0;
    SplitFractions fractions;
  };

  static SnippetStore Synthetic(const SyntheticOptions& options);
  // Reads <dir>/<speaker>/*.wav (mono, at sample_rate) and cuts each file
  // into consecutive non-overlapping snippets; shorter tails are dropped.
  static SnippetStore FromDirectory(const std::string& dir, double snippet_seconds,
                                    double sample_rate, std::uint64_t seed,
                                    SplitFractions fractions = {});

  std::size_t size(Split split) const { return items(split).size(); }
  std::vector<double> Get(Split split, std::size_t index) const;
  const std::string& Speaker(Split split, std::size_t index) const;
  std::vector<std::string> Speakers(Split split) const;

  bool synthetic() const { return synthetic_; }
  double sample_rate() const { return sample_rate_; }
  double snippet_seconds() const { return snippet_seconds_; }

 private:
  struct Item {
    std::size_t speaker = 0;
    std::uint64_t key = 0;  // generator index or audio slot
  };

  const std::vector<Item>& items(Split split) const;
  // Assigns speakers to splits and checks that no speaker is shared.
  void AssignSplits(std::uint64_t seed, const SplitFractions& fractions,
                    const std::vector<std::vector<Item>>& by_speaker);

  bool synthetic_ = true;
  std::uint64_t seed_ = 0;
  double sample_rate_ = 16000.0;
  double snippet_seconds_ = 2.0;
  std::vector<std::string> speaker_names_;
  std::vector<std::vector<double>> audio_;
  std::vector<Item> train_, validation_, test_;
};

}  // namespace ngcc

#endif  // NGCC_SNIPPETS_H_
