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

#ifndef NGCC_CHECKPOINT_H_
#define NGCC_CHECKPOINT_H_

#include <cstdint>
#include <memory>
#include <string>

#include "json.hpp"
#include "ngcc/model.h"
#include "ngcc/optim.h"

namespace ngcc {

inline constexpr int kCheckpointFormatVersion = 1;

// A checkpoint is a JSON manifest at `<prefix>.json` and a flat
// little-endian float32 blob at `<prefix>.bin` holding every parameter and
// buffer in manifest order.
std::string ManifestPath(const std::string& prefix);
std::string BlobPath(const std::string& prefix);

void SaveCheckpoint(NgccModel& model, const std::string& prefix,
                    const nlohmann::json& metadata = nlohmann::json::object());
// Rebuilds the model from the embedded config and loads its tensors.
std::unique_ptr<NgccModel> LoadCheckpoint(const std::string& prefix);
// Loads tensors into an existing model after checking every shape.
void LoadCheckpointInto(NgccModel& model, const std::string& prefix);
nlohmann::json ReadManifest(const std::string& prefix);

// Full-precision optimizer state for resuming training at an epoch boundary.
struct TrainingState {
  int next_epoch = 0;
  nlohmann::json info = nlohmann::json::object();
};
void SaveTrainingState(const std::string& path, NgccModel& model, Adam& adam,
                       const TrainingState& state);
TrainingState LoadTrainingState(const std::string& path, NgccModel& model, Adam& adam);

// Writes to a temporary sibling and renames it into place.
void WriteFileAtomic(const std::string& path, const std::string& bytes);
std::string ReadFile(const std::string& path);

}  // namespace ngcc

#endif  // NGCC_CHECKPOINT_H_
