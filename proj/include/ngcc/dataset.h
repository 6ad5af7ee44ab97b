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

#ifndef NGCC_DATASET_H_
#define NGCC_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "ngcc/room.h"
#include "ngcc/snippets.h"
#include "ngcc/training.h"

namespace ngcc {

struct SimulateConfig {
  std::uint64_t seed = 0;
  std::size_t scenes = 100;
  Split split = Split::kTrain;
  Geometry geometry = Geometry::TrainingRoom();
  SceneRanges ranges;
  bool anechoic = false;
  std::size_t frame_length = 2048;
  double sample_rate = 16000.0;
  std::size_t synthetic_speakers = 50;
  std::size_t snippets_per_speaker = 50;
  double snippet_seconds = 2.0;
  std::string data_dir;

  void Validate() const;
};

// One manifest line. Offsets are in bytes into the float32 blob; each
// channel holds frame_length samples.
struct DatasetRecord {
  std::size_t index = 0;
  Scene scene;
  int label = 0;
  std::size_t frame_offset = 0;
  std::size_t frame_length = 0;
  double sample_rate = 0.0;
  std::uint64_t x1_offset = 0;
  std::uint64_t x2_offset = 0;

  nlohmann::json ToJson() const;
  static DatasetRecord FromJson(const nlohmann::json& j);
};

// Writes the JSON-lines manifest and the little-endian float32 blob.
// Windows that stay silent after every retry are skipped, so the manifest
// may hold fewer records than requested scenes.
std::vector<DatasetRecord> Simulate(const SimulateConfig& config,
                                    const std::string& manifest_path,
                                    const std::string& blob_path);

std::vector<DatasetRecord> ReadDatasetManifest(const std::string& path);
FramePair ReadDatasetFrames(const std::string& blob_path, const DatasetRecord& record);

}  // namespace ngcc

#endif  // NGCC_DATASET_H_
