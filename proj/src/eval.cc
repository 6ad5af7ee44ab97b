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

#include "ngcc/eval.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include "ngcc/checkpoint.h"
#include "ngcc/error.h"
#include "ngcc/parallel.h"

namespace ngcc {

GccEstimator::GccEstimator(Weighting weighting, int max_lag, std::string name)
    : weighting_(weighting),
      max_lag_(max_lag),
      name_(name.empty() ? "gcc-" + weighting.ToString() : std::move(name)) {}

std::vector<int> GccEstimator::Estimate(std::span<const FramePair> frames) {
  std::vector<int> out(frames.size());
  ParallelFor(frames.size(), [&](std::size_t i) {
    out[i] = EstimateDelay(Gcc(frames[i].x1, frames[i].x2, weighting_, max_lag_));
  });
  return out;
}

ModelEstimator::ModelEstimator(NgccModel& model, std::string name,
                               std::size_t batch_size)
    : model_(model), name_(std::move(name)), batch_size_(batch_size) {
  Require(batch_size_ >= 1, ErrorKind::kInvalidArgument, "batch size must be >= 1");
}

std::vector<int> ModelEstimator::Estimate(std::span<const FramePair> frames) {
  std::vector<int> out;
  out.reserve(frames.size());
  for (std::size_t start = 0; start < frames.size(); start += batch_size_) {
    const std::size_t count = std::min(batch_size_, frames.size() - start);
    for (const auto& p : model_.PredictBatch(frames.subspan(start, count))) {
      out.push_back(p.delay);
    }
  }
  return out;
}

std::vector<EvalExample> MakeEvalCell(const SnippetStore& store,
                                      const EvalSetConfig& config,
                                      const Condition& condition) {
  const std::size_t available = store.size(Split::kTest);
  Require(available > 0, ErrorKind::kInvalidData, "test split is empty");
  Require(config.scenes >= 1 && config.windows_per_scene >= 1, ErrorKind::kConfig,
          "evaluation needs at least one scene and one window");
  const Geometry& g = config.geometry;
  const std::size_t n = config.frame_length;
  const int max_lag = g.max_lag(config.sample_rate);
  std::vector<std::vector<std::optional<EvalExample>>> slots(config.scenes);
  ParallelFor(config.scenes, [&](std::size_t s) {
    Rng rng = MakeRng(config.seed, "eval-scene", s);
    Scene scene;
    scene.room = g.room;
    scene.room.t60 = condition.t60_s;
    scene.mic1 = g.mic1;
    scene.mic2 = g.mic2;
    for (int a = 0; a < 3; ++a) {
      scene.source[a] = Uniform(rng, config.wall_margin,
                                g.room.dimensions[a] - config.wall_margin);
    }
    scene.snr_db = condition.snr_db;
    scene.seed = rng();
    scene.true_delay_samples = LabelDelay(scene, config.sample_rate);
    const std::size_t pick = static_cast<std::size_t>(rng() % available);
    const std::vector<double> snippet = store.Get(Split::kTest, pick);
    Require(snippet.size() >= n, ErrorKind::kInvalidData, "test snippet shorter than a frame");
    const double span = static_cast<double>(snippet.size() - n);
    for (std::size_t w = 0; w < config.windows_per_scene; ++w) {
      PropagateOptions options;
      options.frame_length = n;
      options.sample_rate = config.sample_rate;
      options.frame_offset =
          static_cast<std::size_t>(std::floor(Uniform(rng, 0.0, span + 1.0 - 1e-9)));
      options.window_index = w;
      EvalExample ex;
      ex.silent = IsSilentWindow(snippet, options.frame_offset, n);
      try {
        ex.frames = Propagate(scene, snippet, options);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kUndefinedSnr) throw;
        slots[s].emplace_back();
        continue;
      }
      ex.label = scene.true_delay_samples;
      Require(std::abs(ex.label) <= max_lag, ErrorKind::kInvalidLabel,
              "evaluation label outside the lag range");
      ex.scene = s;
      ex.window = w;
      ex.condition = condition;
      slots[s].push_back(std::move(ex));
    }
  });
  std::vector<EvalExample> out;
  for (auto& scene : slots) {
    for (auto& ex : scene) {
      if (ex) out.push_back(std::move(*ex));
    }
  }
  return out;
}

std::uint64_t HashExamples(std::span<const EvalExample> examples) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& ex : examples) {
    mix(ex.frames.x1.samples().data(), ex.frames.x1.size() * sizeof(double));
    mix(ex.frames.x2.samples().data(), ex.frames.x2.size() * sizeof(double));
    mix(&ex.label, sizeof(ex.label));
  }
  return h;
}

MetricsReport MetricsFromScatter(std::span<const ScatterRow> rows,
                                 const std::vector<double>& thresholds_cm,
                                 double speed_of_sound, double sample_rate,
                                 bool non_silent_only) {
  std::vector<int> est, truth;
  for (const auto& r : rows) {
    if (non_silent_only && r.silent) continue;
    est.push_back(r.estimate);
    truth.push_back(r.truth);
  }
  return ComputeMetrics(est, truth, thresholds_cm, sample_rate, speed_of_sound);
}

MetricsReport Evaluate(DelayEstimator& estimator, std::span<const EvalExample> examples,
                       const std::vector<double>& thresholds_cm, double speed_of_sound,
                       double sample_rate, bool non_silent_only,
                       std::vector<ScatterRow>* rows) {
  std::vector<FramePair> frames;
  std::vector<const EvalExample*> kept;
  for (const auto& ex : examples) {
    if (non_silent_only && ex.silent) continue;
    frames.push_back(ex.frames);
    kept.push_back(&ex);
  }
  Require(!frames.empty(), ErrorKind::kInvalidArgument, "no examples to evaluate");
  const std::vector<int> est = estimator.Estimate(frames);
  Require(est.size() == frames.size(), ErrorKind::kShape,
          estimator.name() + " returned the wrong number of estimates");
  std::vector<ScatterRow> local;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const EvalExample& ex = *kept[i];
    local.push_back({ex.scene, ex.window, ex.condition.snr_db, ex.condition.t60_s,
                     ex.label, est[i], ex.silent});
  }
  MetricsReport report =
      MetricsFromScatter(local, thresholds_cm, speed_of_sound, sample_rate, false);
  if (!examples.empty()) report.condition = examples.front().condition;
  if (rows) rows->insert(rows->end(), local.begin(), local.end());
  return report;
}

namespace {

std::string FormatDouble(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

std::string ThresholdLabel(double t) {
  std::ostringstream ss;
  ss << t;
  return ss.str();
}

}  // namespace

void WriteScatterCsv(const std::string& path, std::span<const ScatterRow> rows) {
  std::string text = "scene,window,snr_db,t60_s,true_delay,estimated_delay,silent\n";
  for (const auto& r : rows) {
    text += std::to_string(r.scene) + ',' + std::to_string(r.window) + ',' +
            FormatDouble(r.snr_db) + ',' + FormatDouble(r.t60_s) + ',' +
            std::to_string(r.truth) + ',' + std::to_string(r.estimate) + ',' +
            (r.silent ? "1" : "0") + '\n';
  }
  WriteFileAtomic(path, text);
}

std::vector<ScatterRow> ReadScatterCsv(const std::string& path) {
  std::istringstream in(ReadFile(path));
  std::string line;
  Require(static_cast<bool>(std::getline(in, line)) &&
              line == "scene,window,snr_db,t60_s,true_delay,estimated_delay,silent",
          ErrorKind::kInvalidData, "unexpected scatter CSV header in " + path);
  std::vector<ScatterRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string f[7];
    for (auto& s : f) {
      Require(static_cast<bool>(std::getline(fields, s, ',')), ErrorKind::kInvalidData,
              "short scatter row: " + line);
    }
    try {
      rows.push_back({std::stoul(f[0]), std::stoul(f[1]), std::stod(f[2]),
                      std::stod(f[3]), std::stoi(f[4]), std::stoi(f[5]), f[6] == "1"});
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidData, "unparsable scatter row: " + line);
    }
  }
  return rows;
}

const GridCell& EvalGrid::cell(double snr_db, double t60_s) const {
  for (const auto& c : cells) {
    if (c.condition.snr_db == snr_db && c.condition.t60_s == t60_s) return c;
  }
  throw Error(ErrorKind::kInvalidArgument, "no grid cell for the requested condition");
}

std::vector<EvalGrid> EvaluateGrid(std::span<DelayEstimator* const> methods,
                                   const SnippetStore& store, const GridConfig& config,
                                   std::vector<std::vector<ScatterRow>>* scatter) {
  Require(!methods.empty(), ErrorKind::kInvalidArgument, "no methods to evaluate");
  Require(!config.snrs_db.empty() && !config.t60s_s.empty(), ErrorKind::kConfig,
          "evaluation grid is empty");
  std::vector<EvalGrid> grids(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) grids[m].method = methods[m]->name();
  if (scatter) scatter->assign(methods.size(), {});
  const double c = config.cell.geometry.room.speed_of_sound;
  for (double t60 : config.t60s_s) {
    for (double snr : config.snrs_db) {
      const Condition condition{snr, t60};
      const std::vector<EvalExample> examples = MakeEvalCell(store, config.cell, condition);
      const std::uint64_t hash = HashExamples(examples);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        GridCell cell;
        cell.condition = condition;
        cell.input_hash = hash;
        cell.report = Evaluate(*methods[m], examples, config.thresholds_cm, c,
                               config.cell.sample_rate, config.non_silent_only,
                               scatter ? &(*scatter)[m] : nullptr);
        cell.report.condition = condition;
        grids[m].cells.push_back(std::move(cell));
      }
    }
  }
  return grids;
}

void WriteGridCsv(const std::string& path, std::span<const EvalGrid> grids) {
  std::string text = "method,snr_db,t60_s,n,mae_cm,rmse_cm,exact";
  std::vector<double> thresholds;
  if (!grids.empty() && !grids.front().cells.empty()) {
    for (const auto& [t, acc] : grids.front().cells.front().report.acc_at) {
      thresholds.push_back(t);
      text += ",acc_" + ThresholdLabel(t) + "cm";
    }
  }
  text += ",input_hash\n";
  for (const auto& grid : grids) {
    for (const auto& cell : grid.cells) {
      const auto& r = cell.report;
      text += grid.method + ',' + FormatDouble(cell.condition.snr_db) + ',' +
              FormatDouble(cell.condition.t60_s) + ',' + std::to_string(r.n_examples) +
              ',' + FormatDouble(r.mae_cm) + ',' + FormatDouble(r.rmse_cm) + ',' +
              FormatDouble(r.exact);
      for (double t : thresholds) text += ',' + FormatDouble(r.acc_at.at(t));
      std::ostringstream hash;
      hash << std::hex << std::setw(16) << std::setfill('0') << cell.input_hash;
      text += ',' + hash.str() + '\n';
    }
  }
  WriteFileAtomic(path, text);
}

void WriteThresholdSweepCsv(const std::string& path, std::span<const EvalGrid> grids) {
  std::string text = "method,threshold_cm,accuracy\n";
  for (const auto& grid : grids) {
    std::map<double, double> hits;
    std::size_t total = 0;
    for (const auto& cell : grid.cells) {
      total += cell.report.n_examples;
      for (const auto& [t, acc] : cell.report.acc_at) {
        hits[t] += acc * static_cast<double>(cell.report.n_examples);
      }
    }
    for (const auto& [t, h] : hits) {
      text += grid.method + ',' + FormatDouble(t) + ',' +
              FormatDouble(h / static_cast<double>(total)) + '\n';
    }
  }
  WriteFileAtomic(path, text);
}

double MeanAccuracy(const EvalGrid& grid, double t60_s, std::span<const double> snrs_db,
                    double threshold_cm) {
  Require(!snrs_db.empty(), ErrorKind::kInvalidArgument, "no SNR levels given");
  double sum = 0.0;
  for (double snr : snrs_db) sum += grid.cell(snr, t60_s).report.acc_at.at(threshold_cm);
  return sum / static_cast<double>(snrs_db.size());
}

ExactnessReport CheckExactness(NgccModel& model, std::span<const double> signal) {
  const ModelConfig& config = model.config();
  Require(signal.size() == config.frame_length, ErrorKind::kShape,
          "exactness signal must be one frame long");
  const int max_lag = config.max_lag;
  const Frame base(std::vector<double>(signal.begin(), signal.end()), config.sample_rate);
  std::vector<FramePair> batch;
  for (int tau = -max_lag; tau <= max_lag; ++tau) {
    batch.push_back({CircularShift(base, tau), base});
  }
  const nn::Tensor r = model.Correlations(batch, nn::Mode::kEval);
  const nn::Tensor logits = model.classifier().Forward(r, nn::Mode::kEval);
  ExactnessReport report;
  const std::size_t channels = r.shape().channels;
  const std::size_t lags = r.shape().length;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const int tau = static_cast<int>(b) - max_lag;
    ++report.cases;
    bool all_columns = true;
    std::vector<double> mean(lags, 0.0);
    for (std::size_t l = 0; l < channels; ++l) {
      auto col = r.row(b, l);
      for (std::size_t m = 0; m < lags; ++m) {
        const double target = static_cast<int>(m) - max_lag == tau ? 1.0 : 0.0;
        report.max_deviation = std::max(report.max_deviation, std::abs(col[m] - target));
        mean[m] += col[m] / static_cast<double>(channels);
      }
      if (ArgmaxLag(col, max_lag) != tau) all_columns = false;
    }
    if (all_columns) ++report.columns_exact;
    if (ArgmaxLag(mean, max_lag) == tau) ++report.mean_exact;
    if (model.PredictionFromLogits(logits.row(b, 0)).delay == tau) {
      ++report.predict_exact;
    }
  }
  return report;
}

}  // namespace ngcc
