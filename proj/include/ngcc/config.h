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

#ifndef NGCC_CONFIG_H_
#define NGCC_CONFIG_H_

#include <string>
#include <vector>

#include "json.hpp"
#include "ngcc/dataset.h"
#include "ngcc/eval.h"
#include "ngcc/training.h"

namespace ngcc {

inline constexpr int kConfigVersion = 1;

// One documented key of a JSON run config.
struct ConfigKey {
  std::string name;
  std::string type;
  std::string default_value;
  std::string help;
};

const std::vector<ConfigKey>& TrainConfigKeys();
const std::vector<ConfigKey>& SimulateConfigKeys();
const std::vector<ConfigKey>& EvalConfigKeys();

// Aligned "name  type  default  help" lines for --help output.
std::string DescribeConfigKeys(const std::vector<ConfigKey>& keys);

// Parses a JSON file; errors are kConfig.
nlohmann::json LoadConfigFile(const std::string& path);

struct TrainRun {
  TrainConfig train;
  std::string checkpoint;  // prefix
  std::string log;
  std::string state;
};

struct EvalRun {
  GridConfig grid;
  // Checkpoint prefix of the learned model; empty evaluates baselines only.
  std::string checkpoint;
  std::vector<std::string> baselines = {"phat"};
  std::string output_dir = ".";
  bool scatter = true;
  std::uint64_t source_seed = 0;
  std::size_t synthetic_speakers = 50;
  std::size_t snippets_per_speaker = 50;
  double snippet_seconds = 2.0;
  std::string data_dir;
  std::size_t batch_size = 32;
};

struct SimulateRun {
  SimulateConfig simulate;
  std::string manifest = "dataset.jsonl";
  std::string blob = "dataset.bin";
};

// Each parser checks the version field, rejects unknown keys and validates
// the result. The optional "preset" key ("desk" or "paper") of a train
// config is applied before the other keys.
TrainRun ParseTrainConfig(const nlohmann::json& j);
EvalRun ParseEvalConfig(const nlohmann::json& j);
SimulateRun ParseSimulateConfig(const nlohmann::json& j);

}  // namespace ngcc

#endif  // NGCC_CONFIG_H_
