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

#ifndef NGCC_TRAINING_H_
#define NGCC_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ngcc/model.h"
#include "ngcc/room.h"
#include "ngcc/snippets.h"

namespace ngcc {

// Room and microphone pair used to generate scenes.
struct Geometry {
  RoomSpec room;
  Position mic1{};
  Position mic2{};

  int max_lag(double sample_rate) const;
  static Geometry TrainingRoom();    // 7 x 5 x 3 m
  static Geometry EvaluationRoom();  // 6 x 4 x 2.5 m
};

struct TrainConfig {
  ModelConfig model = ModelConfig::DeskScale();
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  int epochs = 30;
  std::uint64_t seed = 0;
  SceneRanges ranges;
  Geometry geometry = Geometry::TrainingRoom();
  // Ignore reverberation and noise: every scene is anechoic and noise free.
  bool anechoic = false;
  // Probability of exchanging the two microphones (and negating the label).
  double swap_probability = 0.5;
  // Fixed validation scenes drawn from the validation speakers.
  std::size_t validation_scenes = 200;
  // Synthetic source settings; ignored when data_dir is set.
  std::size_t synthetic_speakers = 50;
  std::size_t snippets_per_speaker = 50;
  double snippet_seconds = 2.0;
  std::string data_dir;

  void Validate() const;
  static TrainConfig DeskScale();
  static TrainConfig PaperScale();
};

SnippetStore MakeSnippetStore(const TrainConfig& config);

// True when the window RMS falls below kSilenceRatio times the RMS of the
// whole source signal.
inline constexpr double kSilenceRatio = 0.05;
bool IsSilentWindow(std::span<const double> signal, std::size_t offset,
                    std::size_t length);

struct TrainingExample {
  FramePair frames;
  int label = 0;
  Scene scene;
  std::size_t frame_offset = 0;
};

inline constexpr int kSilenceRetries = 10;

// Samples a scene and a random window of `snippet`, retrying the window
// offset up to kSilenceRetries times while it is silent. Returns nothing if
// every attempt was silent.
std::optional<TrainingExample> MakeTrainingExample(std::span<const double> snippet,
                                                   const TrainConfig& config,
                                                   Rng& rng);

// Exchanges the microphones of an example in place.
void SwapMicrophones(TrainingExample& example);

// Deterministic example for (epoch, position); skipped examples are nullopt.
std::optional<TrainingExample> EpochExample(const SnippetStore& store,
                                            const TrainConfig& config, int epoch,
                                            std::size_t position);
std::vector<std::size_t> EpochOrder(const TrainConfig& config, std::size_t count,
                                    int epoch);
std::vector<TrainingExample> ValidationSet(const SnippetStore& store,
                                           const TrainConfig& config);

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_ce = 0.0;
  double train_loss = 0.0;
  double val_acc = 0.0;
  std::size_t skipped = 0;
};

struct TrainOptions {
  // Checkpoint prefix for the best validation model; empty disables saving.
  std::string checkpoint_prefix;
  // CSV log with columns epoch,lr,train_ce,train_loss,val_acc,skipped.
  std::string log_path;
  // Full-precision state written after every epoch and read by resume.
  std::string state_path;
  bool resume = false;
  // Stop after this many epochs have completed in total (for testing).
  std::optional<int> stop_after_epoch;
  std::function<void(const EpochLog&)> on_epoch;
  std::function<void(int epoch, std::size_t batch, std::size_t batches, double loss)>
      on_batch;
};

struct TrainResult {
  std::vector<EpochLog> log;
  double best_val_acc = -1.0;
  int best_epoch = -1;
};

// Acc@10 cm of the model on a set of examples.
double ValidationAccuracy(NgccModel& model, std::span<const TrainingExample> set,
                          double speed_of_sound, std::size_t batch_size);

// Trains in place; on return the model holds the best validation weights.
TrainResult Train(NgccModel& model, const TrainConfig& config,
                  const SnippetStore& store, const TrainOptions& options = {});

}  // namespace ngcc

#endif  // NGCC_TRAINING_H_
