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

#include "ngcc/training.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ngcc/checkpoint.h"
#include "ngcc/error.h"
#include "ngcc/gcc.h"
#include "ngcc/metrics.h"
#include "ngcc/optim.h"
#include "ngcc/parallel.h"

namespace ngcc {

int Geometry::max_lag(double sample_rate) const {
  return MaxLag(Distance(mic1, mic2), sample_rate, room.speed_of_sound);
}

Geometry Geometry::TrainingRoom() {
  return {RoomSpec{{7.0, 5.0, 3.0}, 0.0}, {3.5, 2.25, 1.5}, {3.5, 2.75, 1.5}};
}

Geometry Geometry::EvaluationRoom() {
  return {RoomSpec{{6.0, 4.0, 2.5}, 0.0}, {3.0, 1.75, 1.25}, {3.0, 2.25, 1.25}};
}

void TrainConfig::Validate() const {
  model.Validate();
  Require(batch_size >= 2, ErrorKind::kConfig, "batch_size must be >= 2 for batchnorm");
  Require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorKind::kConfig,
          "learning_rate must be positive");
  Require(epochs >= 1, ErrorKind::kConfig, "epochs must be >= 1");
  Require(ranges.t60_s.first <= ranges.t60_s.second &&
              ranges.snr_db.first <= ranges.snr_db.second,
          ErrorKind::kConfig, "sampling ranges must be nonempty");
  Require(ranges.t60_s.first > 0.0 || anechoic, ErrorKind::kConfig,
          "t60 range must be positive");
  Require(swap_probability >= 0.0 && swap_probability <= 1.0, ErrorKind::kConfig,
          "swap_probability must lie in [0, 1]");
  Require(validation_scenes >= 1, ErrorKind::kConfig, "validation_scenes must be >= 1");
  Require(snippet_seconds * model.sample_rate >= static_cast<double>(model.frame_length),
          ErrorKind::kConfig, "snippets must be at least one frame long");
  geometry.room.Validate();
  Require(geometry.room.Contains(geometry.mic1) && geometry.room.Contains(geometry.mic2),
          ErrorKind::kConfig, "microphones must lie inside the room");
  Require(geometry.max_lag(model.sample_rate) == model.max_lag, ErrorKind::kConfig,
          "model max_lag " + std::to_string(model.max_lag) +
              " does not match the microphone spacing (" +
              std::to_string(geometry.max_lag(model.sample_rate)) + ")");
}

TrainConfig TrainConfig::DeskScale() {
  TrainConfig c;
  c.model = ModelConfig::DeskScale();
  c.epochs = 5;
  return c;
}

TrainConfig TrainConfig::PaperScale() {
  TrainConfig c;
  c.model = ModelConfig::PaperScale();
  c.epochs = 30;
  return c;
}

SnippetStore MakeSnippetStore(const TrainConfig& config) {
  if (!config.data_dir.empty()) {
    return SnippetStore::FromDirectory(config.data_dir, config.snippet_seconds,
                                       config.model.sample_rate, config.seed);
  }
  SnippetStore::SyntheticOptions options;
  options.seed = config.seed;
  options.speakers = config.synthetic_speakers;
  options.snippets_per_speaker = config.snippets_per_speaker;
  options.snippet_seconds = config.snippet_seconds;
  options.sample_rate = config.model.sample_rate;
  return SnippetStore::Synthetic(options);
}

bool IsSilentWindow(std::span<const double> signal, std::size_t offset,
                    std::size_t length) {
  Require(offset + length <= signal.size(), ErrorKind::kInvalidArgument,
          "window exceeds the signal");
  double total = 0.0;
  for (double v : signal) total += v * v;
  double window = 0.0;
  for (std::size_t i = offset; i < offset + length; ++i) window += signal[i] * signal[i];
  const double rms_all = std::sqrt(total / static_cast<double>(signal.size()));
  const double rms_win = std::sqrt(window / static_cast<double>(length));
  return !(rms_win > kSilenceRatio * rms_all);
}

std::optional<TrainingExample> MakeTrainingExample(std::span<const double> snippet,
                                                   const TrainConfig& config,
                                                   Rng& rng) {
  const std::size_t n = config.model.frame_length;
  Require(snippet.size() >= n, ErrorKind::kInvalidData,
          "snippet shorter than one frame");
  SceneRanges ranges = config.ranges;
  if (config.anechoic) {
    ranges.t60_s = {0.0, 0.0};
    ranges.snr_db = {std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity()};
  }
  const Geometry& g = config.geometry;
  TrainingExample ex;
  ex.scene = SampleScene(g.room, g.mic1, g.mic2, ranges, config.model.sample_rate, rng);
  const std::size_t span = snippet.size() - n;
  for (int attempt = 0; attempt < kSilenceRetries; ++attempt) {
    const std::size_t offset = static_cast<std::size_t>(
        std::floor(Uniform(rng, 0.0, static_cast<double>(span) + 1.0 - 1e-9)));
    if (IsSilentWindow(snippet, offset, n)) continue;
    PropagateOptions options;
    options.frame_length = n;
    options.sample_rate = config.model.sample_rate;
    options.frame_offset = offset;
    ex.frames = Propagate(ex.scene, snippet, options);
    ex.label = ex.scene.true_delay_samples;
    ex.frame_offset = offset;
    return ex;
  }
  return std::nullopt;
}

void SwapMicrophones(TrainingExample& example) {
  std::swap(example.frames.x1, example.frames.x2);
  std::swap(example.scene.mic1, example.scene.mic2);
  example.label = -example.label;
  example.scene.true_delay_samples = -example.scene.true_delay_samples;
}

std::vector<std::size_t> EpochOrder(const TrainConfig& config, std::size_t count,
                                    int epoch) {
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  Rng rng = MakeRng(config.seed, "batch-order", static_cast<std::uint64_t>(epoch));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::optional<TrainingExample> EpochExample(const SnippetStore& store,
                                            const TrainConfig& config, int epoch,
                                            std::size_t position) {
  const std::size_t count = store.size(Split::kTrain);
  const std::uint64_t key = static_cast<std::uint64_t>(epoch) * count + position;
  Rng rng = MakeRng(config.seed, "scene", key);
  const auto snippet_index = EpochOrder(config, count, epoch)[position];
  const std::vector<double> snippet = store.Get(Split::kTrain, snippet_index);
  auto ex = MakeTrainingExample(snippet, config, rng);
  if (ex && Uniform(rng, 0.0, 1.0) < config.swap_probability) SwapMicrophones(*ex);
  return ex;
}

std::vector<TrainingExample> ValidationSet(const SnippetStore& store,
                                           const TrainConfig& config) {
  const std::size_t available = store.size(Split::kValidation);
  Require(available > 0, ErrorKind::kInvalidData, "validation split is empty");
  std::vector<std::optional<TrainingExample>> slots(config.validation_scenes);
  ParallelFor(slots.size(), [&](std::size_t i) {
    Rng rng = MakeRng(config.seed, "validation", i);
    const std::vector<double> snippet = store.Get(Split::kValidation, i % available);
    slots[i] = MakeTrainingExample(snippet, config, rng);
  });
  std::vector<TrainingExample> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  Require(!out.empty(), ErrorKind::kInvalidData, "every validation window was silent");
  return out;
}

double ValidationAccuracy(NgccModel& model, std::span<const TrainingExample> set,
                          double speed_of_sound, std::size_t batch_size) {
  std::vector<int> estimates, truth;
  for (std::size_t start = 0; start < set.size(); start += batch_size) {
    const std::size_t end = std::min(set.size(), start + batch_size);
    std::vector<FramePair> frames;
    for (std::size_t i = start; i < end; ++i) {
      frames.push_back(set[i].frames);
      truth.push_back(set[i].label);
    }
    for (const auto& p : model.PredictBatch(frames)) estimates.push_back(p.delay);
  }
  const MetricsReport report = ComputeMetrics(estimates, truth, {10.0},
                                              model.config().sample_rate, speed_of_sound);
  return report.acc_at.at(10.0);
}

namespace {

std::string FormatLogRow(const EpochLog& e) {
  std::ostringstream ss;
  ss << e.epoch << ',' << std::setprecision(10) << e.lr << ',' << e.train_ce << ','
     << e.train_loss << ',' << e.val_acc << ',' << e.skipped << '\n';
  return ss.str();
}

nlohmann::json LogToJson(const std::vector<EpochLog>& log) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : log) {
    out.push_back({e.epoch, e.lr, e.train_ce, e.train_loss, e.val_acc, e.skipped});
  }
  return out;
}

std::vector<EpochLog> LogFromJson(const nlohmann::json& j) {
  std::vector<EpochLog> log;
  for (const auto& row : j) {
    log.push_back({row[0].get<int>(), row[1].get<double>(), row[2].get<double>(),
                   row[3].get<double>(), row[4].get<double>(),
                   row[5].get<std::size_t>()});
  }
  return log;
}

std::vector<std::vector<double>> Snapshot(NgccModel& model) {
  std::vector<std::vector<double>> out;
  for (auto* p : model.parameters()) out.push_back(p->value);
  for (auto* b : model.buffers()) out.push_back(b->value);
  return out;
}

void Restore(NgccModel& model, const std::vector<std::vector<double>>& snapshot) {
  std::size_t k = 0;
  for (auto* p : model.parameters()) p->value = snapshot[k++];
  for (auto* b : model.buffers()) b->value = snapshot[k++];
}

}  // namespace

TrainResult Train(NgccModel& model, const TrainConfig& config,
                  const SnippetStore& store, const TrainOptions& options) {
  config.Validate();
  Require(model.config().ToJson() == config.model.ToJson(), ErrorKind::kConfig,
          "model does not match the training config");
  const std::size_t count = store.size(Split::kTrain);
  const std::size_t batches = count / config.batch_size;
  Require(batches >= 1, ErrorKind::kInvalidData,
          "training split smaller than one batch");
  const std::int64_t total_steps = static_cast<std::int64_t>(batches) * config.epochs;
  const std::vector<TrainingExample> validation = ValidationSet(store, config);
  const double c = config.geometry.room.speed_of_sound;

  Adam adam(model.parameters());
  TrainResult result;
  int first_epoch = 0;
  std::vector<std::vector<double>> best;
  if (options.resume) {
    Require(!options.state_path.empty(), ErrorKind::kConfig,
            "resume requires a state path");
    TrainingState state = LoadTrainingState(options.state_path, model, adam);
    first_epoch = state.next_epoch;
    result.log = LogFromJson(state.info.at("log"));
    result.best_val_acc = state.info.at("best_val_acc").get<double>();
    result.best_epoch = state.info.at("best_epoch").get<int>();
    if (result.best_epoch >= 0) {
      Require(!options.checkpoint_prefix.empty(), ErrorKind::kConfig,
              "resume requires the best checkpoint");
      NgccModel best_model(config.model, 0);
      LoadCheckpointInto(best_model, options.checkpoint_prefix);
      best = Snapshot(best_model);
    }
  }

  std::string log_text = "epoch,lr,train_ce,train_loss,val_acc,skipped\n";
  for (const auto& e : result.log) log_text += FormatLogRow(e);
  const int last_epoch =
      options.stop_after_epoch ? std::min(*options.stop_after_epoch, config.epochs)
                               : config.epochs;

  for (int epoch = first_epoch; epoch < last_epoch; ++epoch) {
    EpochLog entry;
    entry.epoch = epoch + 1;
    entry.lr = CosineLr(static_cast<std::int64_t>(epoch) * batches, total_steps,
                        config.learning_rate);
    double ce_sum = 0.0, loss_sum = 0.0;
    std::size_t ce_batches = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      std::vector<std::optional<TrainingExample>> slots(config.batch_size);
      ParallelFor(slots.size(), [&](std::size_t i) {
        slots[i] = EpochExample(store, config, epoch, b * config.batch_size + i);
      });
      std::vector<FramePair> frames;
      std::vector<int> labels;
      for (auto& s : slots) {
        if (!s) {
          ++entry.skipped;
          continue;
        }
        frames.push_back(std::move(s->frames));
        labels.push_back(s->label);
      }
      if (frames.size() < 2) continue;
      const std::int64_t step = static_cast<std::int64_t>(epoch) * batches + b;
      const double lr = CosineLr(step, total_steps, config.learning_rate);
      model.ZeroGrad();
      nn::Tensor logits = model.Forward(frames, nn::Mode::kTrain);
      LossResult loss = model.Loss(logits, labels);
      const double ce = config.model.classifier.head == Head::kCrossEntropy
                            ? loss.loss
                            : CrossEntropyFromLogits(logits, labels,
                                                     config.model.max_lag).loss;
      if (!std::isfinite(loss.loss)) {
        throw Error(ErrorKind::kNumeric,
                    "loss became non-finite at epoch " + std::to_string(epoch + 1) +
                        " batch " + std::to_string(b));
      }
      model.Backward(loss.grad_logits);
      adam.Step(lr);
      ce_sum += ce;
      loss_sum += loss.loss;
      ++ce_batches;
      if (options.on_batch) options.on_batch(epoch + 1, b, batches, loss.loss);
    }
    entry.train_ce = ce_batches ? ce_sum / ce_batches : 0.0;
    entry.train_loss = ce_batches ? loss_sum / ce_batches : 0.0;
    entry.val_acc = ValidationAccuracy(model, validation, c, config.batch_size);

    if (entry.val_acc > result.best_val_acc) {
      result.best_val_acc = entry.val_acc;
      result.best_epoch = entry.epoch;
      best = Snapshot(model);
      if (!options.checkpoint_prefix.empty()) {
        SaveCheckpoint(model, options.checkpoint_prefix,
                       {{"epoch", entry.epoch},
                        {"val_acc", entry.val_acc},
                        {"seed", config.seed}});
      }
    }
    result.log.push_back(entry);
    log_text += FormatLogRow(entry);
    if (!options.log_path.empty()) WriteFileAtomic(options.log_path, log_text);
    if (!options.state_path.empty()) {
      TrainingState state;
      state.next_epoch = epoch + 1;
      state.info = {{"log", LogToJson(result.log)},
                    {"best_val_acc", result.best_val_acc},
                    {"best_epoch", result.best_epoch}};
      SaveTrainingState(options.state_path, model, adam, state);
    }
    if (options.on_epoch) options.on_epoch(entry);
  }
  if (!best.empty()) Restore(model, best);
  return result;
}

}  // namespace ngcc
