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

#ifndef NGCC_EVAL_H_
#define NGCC_EVAL_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ngcc/gcc.h"
#include "ngcc/metrics.h"
#include "ngcc/model.h"
#include "ngcc/room.h"
#include "ngcc/snippets.h"
#include "ngcc/training.h"

namespace ngcc {

// Anything that maps frame pairs to integer lags. Baselines and learned
// models are scored through the same interface.
class DelayEstimator {
 public:
  virtual ~DelayEstimator() = default;
  virtual std::string name() const = 0;
  virtual std::vector<int> Estimate(std::span<const FramePair> frames) = 0;
};

class GccEstimator : public DelayEstimator {
 public:
  GccEstimator(Weighting weighting, int max_lag, std::string name = "");
  std::string name() const override { return name_; }
  std::vector<int> Estimate(std::span<const FramePair> frames) override;

 private:
  Weighting weighting_;
  int max_lag_;
  std::string name_;
};

class ModelEstimator : public DelayEstimator {
 public:
  explicit ModelEstimator(NgccModel& model, std::string name = "ngcc",
                          std::size_t batch_size = 32);
  std::string name() const override { return name_; }
  std::vector<int> Estimate(std::span<const FramePair> frames) override;

 private:
  NgccModel& model_;
  std::string name_;
  std::size_t batch_size_;
};

struct EvalExample {
  FramePair frames;
  int label = 0;
  bool silent = false;
  std::size_t scene = 0;
  std::size_t window = 0;
  Condition condition;
};

// Scene randomness (source position, source snippet, window offsets and
// noise) depends only on (seed, scene index), so every cell and every
// method sees the same scenes.
struct EvalSetConfig {
  Geometry geometry = Geometry::EvaluationRoom();
  std::uint64_t seed = 0;
  std::size_t scenes = 200;
  std::size_t windows_per_scene = 1;
  std::size_t frame_length = 2048;
  double sample_rate = 16000.0;
  double wall_margin = kWallMargin;
};

// Examples for one (snr, t60) condition drawn from the test split. A t60 of
// zero gives anechoic scenes and an infinite SNR noise-free ones.
std::vector<EvalExample> MakeEvalCell(const SnippetStore& store,
                                      const EvalSetConfig& config,
                                      const Condition& condition);

// FNV-1a over the float64 samples and labels of a cell.
std::uint64_t HashExamples(std::span<const EvalExample> examples);

struct ScatterRow {
  std::size_t scene = 0;
  std::size_t window = 0;
  double snr_db = 0.0;
  double t60_s = 0.0;
  int truth = 0;
  int estimate = 0;
  bool silent = false;
};

// Scores an estimator; with non_silent_only, silent windows are excluded.
// Appends one scatter row per scored example when rows is non-null.
MetricsReport Evaluate(DelayEstimator& estimator, std::span<const EvalExample> examples,
                       const std::vector<double>& thresholds_cm, double speed_of_sound,
                       double sample_rate, bool non_silent_only = false,
                       std::vector<ScatterRow>* rows = nullptr);

MetricsReport MetricsFromScatter(std::span<const ScatterRow> rows,
                                 const std::vector<double>& thresholds_cm,
                                 double speed_of_sound, double sample_rate,
                                 bool non_silent_only = false);

// Columns: scene,window,snr_db,t60_s,true_delay,estimated_delay,silent
void WriteScatterCsv(const std::string& path, std::span<const ScatterRow> rows);
std::vector<ScatterRow> ReadScatterCsv(const std::string& path);

struct GridConfig {
  std::vector<double> snrs_db = {0, 6, 12, 18, 24, 30};
  std::vector<double> t60s_s = {0.2, 0.4, 0.6, 0.8, 1.0};
  EvalSetConfig cell;
  std::vector<double> thresholds_cm = DefaultThresholdsCm();
  bool non_silent_only = false;
};

struct GridCell {
  Condition condition;
  MetricsReport report;
  std::uint64_t input_hash = 0;
};

struct EvalGrid {
  std::string method;
  std::vector<GridCell> cells;  // t60-major, then snr

  const GridCell& cell(double snr_db, double t60_s) const;
};

// Evaluates every method on identical inputs, cell by cell. Scatter rows
// per method are appended when scatter is non-null.
std::vector<EvalGrid> EvaluateGrid(std::span<DelayEstimator* const> methods,
                                   const SnippetStore& store, const GridConfig& config,
                                   std::vector<std::vector<ScatterRow>>* scatter = nullptr);

// Columns: method,snr_db,t60_s,n,mae_cm,rmse_cm,exact,acc_<t>cm...,input_hash
void WriteGridCsv(const std::string& path, std::span<const EvalGrid> grids);
// Columns: method,threshold_cm,accuracy (pooled over all cells).
void WriteThresholdSweepCsv(const std::string& path, std::span<const EvalGrid> grids);

// Mean Acc@threshold over the cells with the given t60 and SNRs.
double MeanAccuracy(const EvalGrid& grid, double t60_s, std::span<const double> snrs_db,
                    double threshold_cm = 10.0);

struct ExactnessReport {
  std::size_t cases = 0;
  // Largest |R[m, l] - delta(m - tau)| over all taps, channels and cases.
  double max_deviation = 0.0;
  // Cases where every channel column peaks at tau.
  std::size_t columns_exact = 0;
  // Cases where the channel-averaged correlation peaks at tau.
  std::size_t mean_exact = 0;
  // Cases where the full model prediction equals tau.
  std::size_t predict_exact = 0;
};

// Feeds x1 = x circularly shifted by tau and x2 = x for every tau in
// [-max_lag, max_lag] and accumulates how far the correlation matrix is
// from a unit impulse at tau.
ExactnessReport CheckExactness(NgccModel& model, std::span<const double> signal);

}  // namespace ngcc

#endif  // NGCC_EVAL_H_
