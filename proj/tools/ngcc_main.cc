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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ngcc/checkpoint.h"
#include "ngcc/config.h"
#include "ngcc/dataset.h"
#include "ngcc/error.h"
#include "ngcc/eval.h"
#include "ngcc/gcc.h"
#include "ngcc/model.h"
#include "ngcc/parallel.h"
#include "ngcc/signal.h"
#include "ngcc/speech.h"
#include "ngcc/training.h"
#include "ngcc/wav.h"

namespace {

using namespace ngcc;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kInfeasible:
    case ErrorKind::kDegenerateGeometry:
      return kExitConfig;
    case ErrorKind::kNumeric:
    case ErrorKind::kConjugateSymmetry:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

// Reads the first frame_length samples after offset from a mono WAV.
Frame ReadFrame(const std::string& path, std::size_t offset,
                std::optional<std::size_t> frame_length, double sample_rate) {
  const std::vector<double> samples = LoadWav(path, sample_rate);
  Require(offset < samples.size(), ErrorKind::kInvalidData,
          path + " is shorter than the requested offset");
  const std::size_t available = samples.size() - offset;
  std::size_t n = frame_length.value_or(0);
  if (n == 0) {
    n = 1;
    while (n * 2 <= available) n *= 2;
  }
  Require(IsPowerOfTwo(n), ErrorKind::kConfig, "frame length must be a power of two");
  Require(n <= available, ErrorKind::kInvalidData,
          path + " holds fewer than " + std::to_string(n) + " samples after the offset");
  return Frame(std::vector<double>(samples.begin() + offset, samples.begin() + offset + n),
               sample_rate);
}

struct GccArgs {
  std::string in1, in2;
  std::string weighting = "phat";
  int max_lag = 23;
  std::size_t offset = 0;
  std::size_t frame_length = 0;
  double sample_rate = kDefaultSampleRate;
};

int RunGcc(const GccArgs& a) {
  const Weighting w = Weighting::Parse(a.weighting);
  std::optional<std::size_t> n;
  if (a.frame_length) n = a.frame_length;
  const Frame x1 = ReadFrame(a.in1, a.offset, n, a.sample_rate);
  const Frame x2 = ReadFrame(a.in2, a.offset, x1.size(), a.sample_rate);
  Require(a.max_lag >= 0 && 2 * static_cast<std::size_t>(a.max_lag) < x1.size(),
          ErrorKind::kConfig, "--max-lag must be below half the frame length");
  const CorrelationWindow r = Gcc(x1, x2, w, a.max_lag);
  std::printf("delay=%d\n", EstimateDelay(r));
  std::printf("lag,correlation\n");
  for (int m = -a.max_lag; m <= a.max_lag; ++m) std::printf("%d,%.17g\n", m, r.at(m));
  return 0;
}

int RunSimulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                const std::string& manifest, const std::string& blob) {
  nlohmann::json j = LoadConfigFile(config_path);
  if (seed) j["seed"] = *seed;
  if (!manifest.empty()) j["manifest"] = manifest;
  if (!blob.empty()) j["blob"] = blob;
  const SimulateRun run = ParseSimulateConfig(j);
  const auto records = Simulate(run.simulate, run.manifest, run.blob);
  std::printf("wrote %zu records to %s (%zu requested)\n", records.size(),
              run.manifest.c_str(), run.simulate.scenes);
  return 0;
}

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string checkpoint, log, state;
  bool resume = false;
  bool quiet = false;
};

int RunTrain(const TrainArgs& a) {
  nlohmann::json j = LoadConfigFile(a.config);
  if (a.seed) j["seed"] = *a.seed;
  if (!a.checkpoint.empty()) j["checkpoint"] = a.checkpoint;
  if (!a.log.empty()) j["log"] = a.log;
  if (!a.state.empty()) j["state"] = a.state;
  const TrainRun run = ParseTrainConfig(j);
  const SnippetStore store = MakeSnippetStore(run.train);
  NgccModel model(run.train.model, run.train.seed);
  TrainOptions options;
  options.checkpoint_prefix = run.checkpoint;
  options.log_path = run.log;
  options.state_path = run.state;
  options.resume = a.resume;
  if (!a.quiet) {
    std::fprintf(stderr, "model parameters: %zu, training snippets: %zu\n",
                 model.ParameterCount(), store.size(Split::kTrain));
    options.on_epoch = [](const EpochLog& e) {
      std::fprintf(stderr, "epoch %d lr %.6g train_ce %.4f val_acc %.4f skipped %zu\n",
                   e.epoch, e.lr, e.train_ce, e.val_acc, e.skipped);
    };
  }
  const TrainResult result = Train(model, run.train, store, options);
  std::printf("best epoch %d val_acc %.4f checkpoint %s\n", result.best_epoch,
              result.best_val_acc, run.checkpoint.c_str());
  return 0;
}

struct EvalArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string checkpoint;
  std::string output_dir;
  bool check_exactness = false;
  int exactness_inputs = 5;
};

int CheckExactnessCommand(NgccModel& model, std::uint64_t seed, int inputs) {
  const ModelConfig& c = model.config();
  ExactnessReport total;
  for (int i = 0; i < inputs; ++i) {
    Rng rng = MakeRng(seed, "exactness", static_cast<std::uint64_t>(i));
    const std::vector<double> speech =
        SynthSpeech(static_cast<double>(c.frame_length) / c.sample_rate, c.sample_rate, rng);
    std::vector<double> frame(speech.begin(), speech.begin() + c.frame_length);
    const ExactnessReport r = CheckExactness(model, frame);
    total.cases += r.cases;
    total.max_deviation = std::max(total.max_deviation, r.max_deviation);
    total.columns_exact += r.columns_exact;
    total.mean_exact += r.mean_exact;
    total.predict_exact += r.predict_exact;
  }
  const bool ok = total.max_deviation < 1e-6 && total.columns_exact == total.cases;
  std::printf("exactness cases=%zu max_deviation=%.3g columns_exact=%zu mean_exact=%zu "
              "predict_exact=%zu %s\n",
              total.cases, total.max_deviation, total.columns_exact, total.mean_exact,
              total.predict_exact, ok ? "PASS" : "FAIL");
  return ok ? 0 : kExitNumeric;
}

int RunEval(const EvalArgs& a) {
  nlohmann::json j = LoadConfigFile(a.config);
  if (a.seed) j["seed"] = *a.seed;
  if (!a.checkpoint.empty()) j["checkpoint"] = a.checkpoint;
  if (!a.output_dir.empty()) j["output_dir"] = a.output_dir;
  const EvalRun run = ParseEvalConfig(j);

  std::unique_ptr<NgccModel> model;
  if (!run.checkpoint.empty()) model = LoadCheckpoint(run.checkpoint);
  if (a.check_exactness) {
    Require(model != nullptr, ErrorKind::kConfig, "--check-exactness needs a checkpoint");
    return CheckExactnessCommand(*model, run.grid.cell.seed, a.exactness_inputs);
  }
  if (model) {
    const int expected = run.grid.cell.geometry.max_lag(run.grid.cell.sample_rate);
    Require(model->config().max_lag == expected, ErrorKind::kConfig,
            "checkpoint max_lag does not match the evaluation microphones");
    Require(model->config().frame_length == run.grid.cell.frame_length,
            ErrorKind::kConfig, "checkpoint frame_length does not match the config");
  }

  TrainConfig source;
  source.seed = run.source_seed;
  source.synthetic_speakers = run.synthetic_speakers;
  source.snippets_per_speaker = run.snippets_per_speaker;
  source.snippet_seconds = run.snippet_seconds;
  source.model.sample_rate = run.grid.cell.sample_rate;
  source.data_dir = run.data_dir;
  const SnippetStore store = MakeSnippetStore(source);

  std::vector<std::unique_ptr<DelayEstimator>> owned;
  if (model) {
    owned.push_back(std::make_unique<ModelEstimator>(*model, "ngcc", run.batch_size));
  }
  const int max_lag = run.grid.cell.geometry.max_lag(run.grid.cell.sample_rate);
  for (const auto& b : run.baselines) {
    owned.push_back(std::make_unique<GccEstimator>(Weighting::Parse(b), max_lag));
  }
  std::vector<DelayEstimator*> methods;
  for (auto& m : owned) methods.push_back(m.get());

  std::vector<std::vector<ScatterRow>> scatter;
  const auto grids =
      EvaluateGrid(methods, store, run.grid, run.scatter ? &scatter : nullptr);
  std::filesystem::create_directories(run.output_dir);
  const std::filesystem::path dir(run.output_dir);
  WriteGridCsv((dir / "grid.csv").string(), grids);
  WriteThresholdSweepCsv((dir / "threshold_sweep.csv").string(), grids);
  if (run.scatter) {
    for (std::size_t m = 0; m < grids.size(); ++m) {
      WriteScatterCsv((dir / ("scatter_" + grids[m].method + ".csv")).string(),
                      scatter[m]);
    }
  }
  for (const auto& g : grids) {
    double mae = 0.0, acc = 0.0;
    for (const auto& c : g.cells) {
      mae += c.report.mae_cm;
      acc += c.report.acc_at.count(10.0) ? c.report.acc_at.at(10.0) : NAN;
    }
    const double n = static_cast<double>(g.cells.size());
    std::printf("%-16s mean MAE %.3f cm, mean Acc@10cm %.4f over %zu cells\n",
                g.method.c_str(), mae / n, acc / n, g.cells.size());
  }
  return 0;
}

struct PredictArgs {
  std::string checkpoint, in1, in2;
  std::size_t offset = 0;
};

int RunPredict(const PredictArgs& a) {
  const std::unique_ptr<NgccModel> model = LoadCheckpoint(a.checkpoint);
  const ModelConfig& c = model->config();
  const Frame x1 = ReadFrame(a.in1, a.offset, c.frame_length, c.sample_rate);
  const Frame x2 = ReadFrame(a.in2, a.offset, c.frame_length, c.sample_rate);
  const NgccModel::Prediction p = model->Predict(x1, x2);
  std::printf("delay=%d\n", p.delay);
  std::printf("lag,probability\n");
  for (int m = -c.max_lag; m <= c.max_lag; ++m) {
    std::printf("%d,%.17g\n", m, p.posterior.at(m));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time delay estimation with GCC-PHAT and a learned shift-equivariant "
               "filter bank"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  GccArgs gcc_args;
  auto* gcc = app.add_subcommand("gcc", "Estimate the delay between two WAV files");
  gcc->add_option("--in1", gcc_args.in1, "First microphone WAV")->required();
  gcc->add_option("--in2", gcc_args.in2, "Second microphone WAV")->required();
  gcc->add_option("--weighting", gcc_args.weighting, "none, phat or beta:<b>")
      ->capture_default_str();
  gcc->add_option("--max-lag", gcc_args.max_lag, "Largest lag searched, in samples")
      ->capture_default_str();
  gcc->add_option("--offset", gcc_args.offset, "First sample of the analysis window")
      ->capture_default_str();
  gcc->add_option("--frame-length", gcc_args.frame_length,
                  "Window length (power of two); 0 uses the longest that fits")
      ->capture_default_str();
  gcc->add_option("--sample-rate", gcc_args.sample_rate, "Expected WAV sample rate")
      ->capture_default_str();

  std::string sim_config, sim_manifest, sim_blob;
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("simulate", "Write a simulated dataset");
  sim->add_option("--config", sim_config, "JSON config file")->required();
  sim->add_option("--seed", sim_seed, "Override the config seed");
  sim->add_option("--manifest", sim_manifest, "Override the manifest path");
  sim->add_option("--blob", sim_blob, "Override the blob path");
  sim->footer("Config keys:\n" + DescribeConfigKeys(SimulateConfigKeys()));

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", train_args.config, "JSON config file")->required();
  train->add_option("--seed", train_args.seed, "Override the config seed");
  train->add_option("--checkpoint", train_args.checkpoint, "Override the checkpoint prefix");
  train->add_option("--log", train_args.log, "Override the CSV log path");
  train->add_option("--state", train_args.state, "Override the resume state path");
  train->add_flag("--resume", train_args.resume, "Continue from the resume state");
  train->add_flag("--quiet", train_args.quiet, "Only print the final summary");
  train->footer("Config keys:\n" + DescribeConfigKeys(TrainConfigKeys()));

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate a model and baselines on the grid");
  eval->add_option("--config", eval_args.config, "JSON config file")->required();
  eval->add_option("--seed", eval_args.seed, "Override the evaluation seed");
  eval->add_option("--checkpoint", eval_args.checkpoint, "Override the checkpoint prefix");
  eval->add_option("--output-dir", eval_args.output_dir, "Override the output directory");
  eval->add_flag("--check-exactness", eval_args.check_exactness,
                 "Check exact delay recovery on shifted copies instead of the grid");
  eval->add_option("--exactness-inputs", eval_args.exactness_inputs,
                   "Synthetic inputs used by --check-exactness")
      ->capture_default_str();
  eval->footer("Config keys:\n" + DescribeConfigKeys(EvalConfigKeys()));

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "Posterior over delays for two WAV files");
  predict->add_option("--checkpoint", predict_args.checkpoint, "Checkpoint prefix")
      ->required();
  predict->add_option("--in1", predict_args.in1, "First microphone WAV")->required();
  predict->add_option("--in2", predict_args.in2, "Second microphone WAV")->required();
  predict->add_option("--offset", predict_args.offset, "First sample of the window")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (threads > 0) SetNumThreads(threads);
    if (gcc->parsed()) return RunGcc(gcc_args);
    if (sim->parsed()) return RunSimulate(sim_config, sim_seed, sim_manifest, sim_blob);
    if (train->parsed()) return RunTrain(train_args);
    if (eval->parsed()) return RunEval(eval_args);
    if (predict->parsed()) return RunPredict(predict_args);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", ErrorKindName(e.kind()), e.what());
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return 0;
}
