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

#include "ngcc/snippets.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "ngcc/error.h"
#include "ngcc/rng.h"
#include "ngcc/speech.h"
#include "ngcc/wav.h"

namespace ngcc {

namespace fs = std::filesystem;

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

SnippetStore SnippetStore::Synthetic(const SyntheticOptions& options) {
  Require(options.speakers >= 3, ErrorKind::kConfig,
          "synthetic store needs at least 3 speakers");
  Require(options.snippets_per_speaker >= 1 && options.snippet_seconds > 0.0,
          ErrorKind::kConfig, "synthetic store needs snippets of positive length");
  SnippetStore store;
  store.synthetic_ = true;
  store.seed_ = options.seed;
  store.sample_rate_ = options.sample_rate;
  store.snippet_seconds_ = options.snippet_seconds;
  std::vector<std::vector<Item>> by_speaker(options.speakers);
  for (std::size_t s = 0; s < options.speakers; ++s) {
    store.speaker_names_.push_back("synth" + std::to_string(s));
    for (std::size_t j = 0; j < options.snippets_per_speaker; ++j) {
      by_speaker[s].push_back({s, s * options.snippets_per_speaker + j});
    }
  }
  store.AssignSplits(options.seed, options.fractions, by_speaker);
  return store;
}

SnippetStore SnippetStore::FromDirectory(const std::string& dir,
                                         double snippet_seconds,
                                         double sample_rate, std::uint64_t seed,
                                         SplitFractions fractions) {
  Require(fs::is_directory(dir), ErrorKind::kIo, "not a directory: " + dir);
  SnippetStore store;
  store.synthetic_ = false;
  store.seed_ = seed;
  store.sample_rate_ = sample_rate;
  store.snippet_seconds_ = snippet_seconds;
  const std::size_t length =
      static_cast<std::size_t>(std::llround(snippet_seconds * sample_rate));

  std::vector<fs::path> speaker_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) speaker_dirs.push_back(entry.path());
  }
  std::sort(speaker_dirs.begin(), speaker_dirs.end());
  std::vector<std::vector<Item>> by_speaker;
  for (const auto& sdir : speaker_dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(sdir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".wav") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    std::vector<Item> items;
    const std::size_t speaker = store.speaker_names_.size();
    for (const auto& file : files) {
      std::vector<double> samples = LoadWav(file.string(), sample_rate);
      for (std::size_t start = 0; start + length <= samples.size(); start += length) {
        items.push_back({speaker, store.audio_.size()});
        store.audio_.emplace_back(samples.begin() + start,
                                  samples.begin() + start + length);
      }
    }
    if (!items.empty()) {
      store.speaker_names_.push_back(sdir.filename().string());
      by_speaker.push_back(std::move(items));
    }
  }
  Require(by_speaker.size() >= 3, ErrorKind::kInvalidData,
          "need at least 3 speakers with usable audio under " + dir);
  store.AssignSplits(seed, fractions, by_speaker);
  return store;
}

void SnippetStore::AssignSplits(std::uint64_t seed, const SplitFractions& fractions,
                                const std::vector<std::vector<Item>>& by_speaker) {
  Require(fractions.train > 0.0 && fractions.validation > 0.0 &&
              fractions.train + fractions.validation < 1.0,
          ErrorKind::kConfig, "split fractions must leave room for all three splits");
  const std::size_t n = by_speaker.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = MakeRng(seed, "speaker-split");
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_train = static_cast<std::size_t>(std::floor(fractions.train * n));
  std::size_t n_val = static_cast<std::size_t>(std::floor(fractions.validation * n));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 2);
  n_val = std::clamp<std::size_t>(n_val, 1, n - n_train - 1);

  std::set<std::size_t> seen[3];
  for (std::size_t rank = 0; rank < n; ++rank) {
    const std::size_t s = order[rank];
    const int split = rank < n_train ? 0 : rank < n_train + n_val ? 1 : 2;
    seen[split].insert(s);
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      for (std::size_t s : seen[a]) {
        Require(!seen[b].contains(s), ErrorKind::kInvalidData,
                "speaker " + speaker_names_[s] + " appears in two splits");
      }
    }
  }
  // Speakers in index order inside each split keep the layout stable.
  for (int split = 0; split < 3; ++split) {
    auto& dst = split == 0 ? train_ : split == 1 ? validation_ : test_;
    for (std::size_t s : seen[split]) {
      dst.insert(dst.end(), by_speaker[s].begin(), by_speaker[s].end());
    }
  }
}

const std::vector<SnippetStore::Item>& SnippetStore::items(Split split) const {
  switch (split) {
    case Split::kTrain:
      return train_;
    case Split::kValidation:
      return validation_;
    case Split::kTest:
      return test_;
  }
  return train_;
}

std::vector<double> SnippetStore::Get(Split split, std::size_t index) const {
  const auto& list = items(split);
  Require(index < list.size(), ErrorKind::kInvalidArgument,
          std::string("snippet index out of range for split ") + SplitName(split));
  const Item& item = list[index];
  if (!synthetic_) return audio_[item.key];
  Rng voice_rng = MakeRng(seed_, "voice", item.speaker);
  const VoiceProfile voice = RandomVoice(voice_rng);
  Rng rng = MakeRng(seed_, "speech", item.key);
  return SynthSpeech(snippet_seconds_, sample_rate_, rng, voice);
}

const std::string& SnippetStore::Speaker(Split split, std::size_t index) const {
  const auto& list = items(split);
  Require(index < list.size(), ErrorKind::kInvalidArgument, "snippet index out of range");
  return speaker_names_[list[index].speaker];
}

std::vector<std::string> SnippetStore::Speakers(Split split) const {
  std::set<std::size_t> ids;
  for (const Item& item : items(split)) ids.insert(item.speaker);
  std::vector<std::string> out;
  for (std::size_t id : ids) out.push_back(speaker_names_[id]);
  return out;
}

}  // namespace ngcc
