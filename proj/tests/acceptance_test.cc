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
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ngcc/checkpoint.h"
#include "ngcc/error.h"
#include "ngcc/eval.h"
#include "ngcc/gcc.h"
#include "ngcc/model.h"
#include "ngcc/nn/layers.h"
#include "ngcc/nn/tensor.h"
#include "ngcc/rng.h"
#include "ngcc/room.h"
#include "ngcc/signal.h"
#include "ngcc/speech.h"
#include "ngcc/training.h"

namespace ngcc {
namespace {

using nn::Mode;
using nn::Shape;
using nn::Tensor;

constexpr double kFs = 16000.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string Format(const char* fmt, ...) {
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void Progress(const std::string& text) {
  std::fprintf(stderr, "[acceptance] %s\n", text.c_str());
  std::fflush(stderr);
}

Frame SpeechFrame(std::size_t n, std::uint64_t seed) {
  Rng rng = MakeRng(seed, "acceptance-speech");
  std::vector<double> x = SynthSpeech(static_cast<double>(n) / kFs + 0.01, kFs, rng);
  x.resize(n);
  return Frame(x, kFs);
}

Tensor RandomTensor(Shape shape, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Tensor t(shape);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

void RandomizeBatchNorms(nn::Sequential& net, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < net.size(); ++i) {
    auto* bn = dynamic_cast<nn::BatchNorm1d*>(&net.layer(i));
    if (bn == nullptr) continue;
    for (std::size_t c = 0; c < bn->scale().size(); ++c) {
      bn->scale().value[c] = u(rng);
      bn->offset().value[c] = 0.3 * g(rng);
      bn->running_mean().value[c] = 0.1 * g(rng);
      bn->running_var().value[c] = u(rng);
    }
  }
}

void RandomizeSincBands(nn::Sequential& net, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> low(20.0, 7000.0), band(50.0, 3000.0);
  for (std::size_t i = 0; i < net.size(); ++i) {
    auto* sinc = dynamic_cast<nn::SincConv1d*>(&net.layer(i));
    if (sinc == nullptr) continue;
    for (int f = 0; f < sinc->num_filters(); ++f) sinc->SetBand(f, low(rng), band(rng));
  }
}

// ||a - n|| / max(||n||, floor).
double RelativeError(const std::vector<double>& analytic, const std::vector<double>& numeric,
                     double floor) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    norm += numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), floor);
}

struct Differences {
  std::vector<double> slope;
  std::vector<bool> kink;
  std::size_t kinks = 0;
};

// Richardson-extrapolated central differences; elements whose one-sided
// slopes disagree by more than half their magnitude sit on a
// non-differentiable point and are marked.
Differences CentralDifferences(std::span<double> values, const std::function<double()>& loss) {
  constexpr double kStep = 1e-6;
  Differences out;
  out.slope.resize(values.size());
  out.kink.assign(values.size(), false);
  const double center = loss();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double keep = values[i];
    values[i] = keep + kStep;
    const double up = loss();
    values[i] = keep - kStep;
    const double down = loss();
    values[i] = keep + kStep / 2;
    const double half_up = loss();
    values[i] = keep - kStep / 2;
    const double half_down = loss();
    values[i] = keep;
    const double coarse = (up - down) / (2.0 * kStep);
    const double fine = (half_up - half_down) / kStep;
    out.slope[i] = (4.0 * fine - coarse) / 3.0;
    const double right = (up - center) / kStep, left = (center - down) / kStep;
    if (std::abs(right - left) > 0.5 * std::max(1.0, std::abs(right) + std::abs(left))) {
      out.kink[i] = true;
      ++out.kinks;
    }
  }
  return out;
}

std::size_t g_kinks = 0;

// Relative error over the differentiable elements.
double CompareGradient(std::span<const double> analytic, const Differences& numeric,
                       double floor) {
  std::vector<double> a, n;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (numeric.kink[i]) continue;
    a.push_back(analytic[i]);
    n.push_back(numeric.slope[i]);
  }
  g_kinks += numeric.kinks;
  return RelativeError(a, n, floor);
}

// Worst relative error of backward vs central differences of <g, layer(x)>.
double LayerGradientError(nn::Layer& layer, Tensor x, Mode mode, std::mt19937_64& rng) {
  const Tensor y = layer.Forward(x, mode);
  const Tensor g = RandomTensor(y.shape(), rng);
  for (auto* p : layer.parameters()) p->ZeroGrad();
  layer.Forward(x, mode);
  const Tensor gx = layer.Backward(g);
  auto loss = [&]() {
    const Tensor out = layer.Forward(x, mode);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out.values()[i] * g.values()[i];
    return s;
  };
  double worst = 0.0;
  if (layer.needs_input_grad()) {
    worst = std::max(worst, CompareGradient(gx.values(), CentralDifferences(x.values(), loss),
                                            1e-6));
  }
  for (auto* p : layer.parameters()) {
    worst = std::max(worst, CompareGradient(p->grad, CentralDifferences(p->value, loss), 1e-6));
  }
  return worst;
}

// ---------------------------------------------------------------------------

Outcome CheckEquivariance() {
  NgccModel model(ModelConfig::DeskScale(), 5);
  std::mt19937_64 rng(5);
  RandomizeBatchNorms(model.backbone(), rng);
  RandomizeSincBands(model.backbone(), rng);
  const Frame x = SpeechFrame(2048, 5);
  const Tensor base = model.FilterSignals(x);
  double worst = 0.0;
  for (long tau : {1L, 7L, 501L, 2047L}) {
    const Tensor shifted = model.FilterSignals(CircularShift(x, tau));
    const Tensor expected = nn::ShiftLength(base, tau);
    for (std::size_t i = 0; i < shifted.size(); ++i) {
      worst = std::max(worst, std::abs(shifted.values()[i] - expected.values()[i]));
    }
  }
  return {worst < 1e-5, Format("max residual %.3g over tau {1, 7, 501, 2047}", worst)};
}

Outcome CheckGccOracle() {
  const std::size_t n = 2048;
  const int max_lag = 23;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> a(n), b(n);
    for (double& v : a) v = dist(rng);
    for (double& v : b) v = dist(rng);
    const CorrelationWindow r =
        Gcc(Frame(a, kFs), Frame(b, kFs), Weighting::Unweighted(), max_lag);
    for (int m = -max_lag; m <= max_lag; ++m) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const long j = (static_cast<long>(t) - m + 2 * static_cast<long>(n)) %
                       static_cast<long>(n);
        acc += a[t] * b[static_cast<std::size_t>(j)];
      }
      worst = std::max(worst, std::abs(r.at(m) - acc / static_cast<double>(n)));
    }
  }
  return {worst < 1e-8, Format("1000 pairs, N=2048, max |fft - direct| %.3g", worst)};
}

Outcome CheckGradients() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> channels(1, 4), kernel_half(0, 3), length(8, 24);
  double worst = 0.0;
  std::string worst_name;
  int configurations = 0;
  auto record = [&](double err, const std::string& name) {
    if (err > worst) {
      worst = err;
      worst_name = name;
    }
  };
  for (int trial = 0; trial < 20; ++trial) {
    const int in = channels(rng), out = channels(rng), k = 2 * kernel_half(rng) + 1;
    const std::size_t batch = 2 + trial % 3, len = static_cast<std::size_t>(length(rng));
    Rng init = MakeRng(100 + trial, "acceptance-grad");
    for (auto padding : {nn::Padding::kCircular, nn::Padding::kZero}) {
      nn::Conv1d conv("c", in, out, k, padding);
      conv.Initialize(init);
      record(LayerGradientError(conv, RandomTensor({batch, static_cast<std::size_t>(in), len}, rng),
                                Mode::kTrain, rng),
             "conv1d");
    }
    nn::SincConv1d sinc("s", out, k + 4, kFs);
    sinc.set_needs_input_grad(trial % 2 == 0);
    record(LayerGradientError(sinc, RandomTensor({batch, 1, 32}, rng), Mode::kTrain, rng),
           "sinc");
    nn::BatchNorm1d bn("b", in, 0.1, 1e-5);
    record(LayerGradientError(bn, RandomTensor({batch, static_cast<std::size_t>(in), len}, rng),
                              Mode::kTrain, rng),
           "batchnorm/train");
    record(LayerGradientError(bn, RandomTensor({batch, static_cast<std::size_t>(in), len}, rng),
                              Mode::kEval, rng),
           "batchnorm/eval");
    nn::LeakyRelu relu(0.01);
    record(LayerGradientError(relu, RandomTensor({batch, static_cast<std::size_t>(in), len}, rng),
                              Mode::kTrain, rng),
           "leaky_relu");

    ModelConfig c;
    c.backbone.sinc_filters = channels(rng) + 1;
    c.backbone.sinc_kernel = 2 * kernel_half(rng) + 9;
    c.backbone.kernels = {2 * kernel_half(rng) + 1, 3};
    c.backbone.hidden_channels = channels(rng) + 1;
    c.backbone.channels = channels(rng) + 1;
    c.classifier.kernels = {2 * kernel_half(rng) + 1, 3};
    c.classifier.hidden_channels = channels(rng) + 1;
    c.classifier.head = trial % 4 == 3 ? Head::kMseSoftArgmax : Head::kCrossEntropy;
    c.frame_length = 64;
    c.max_lag = 5;
    NgccModel model(c, 200 + trial);
    std::normal_distribution<double> g;
    std::vector<FramePair> frames;
    std::vector<int> labels;
    std::uniform_int_distribution<int> lag(-5, 5);
    for (std::size_t b = 0; b < 3; ++b) {
      std::vector<double> x1(64), x2(64);
      for (double& v : x1) v = g(rng);
      for (double& v : x2) v = g(rng);
      frames.push_back({Frame(x1, kFs), Frame(x2, kFs)});
      labels.push_back(lag(rng));
    }
    model.ZeroGrad();
    const double loss = model.TrainStep(frames, labels);
    auto objective = [&]() {
      return model.Loss(model.Forward(frames, Mode::kTrain), labels).loss;
    };
    for (auto* p : model.parameters()) {
      record(CompareGradient(p->grad, CentralDifferences(p->value, objective),
                           1e-4 * std::max(1.0, loss)),
             "end-to-end " + HeadName(c.classifier.head) + " " + p->name);
    }
    ++configurations;
  }
  return {worst < 1e-4 && configurations >= 20,
          Format("%d configurations, worst relative error %.3g (%s), %zu elements at "
                 "non-differentiable points skipped",
                 configurations, worst, worst_name.c_str(), g_kinks)};
}

double DecayCrossing(const std::vector<double>& tail, double level_db) {
  std::vector<double> edc(tail.size());
  double acc = 0.0;
  for (std::size_t i = tail.size(); i-- > 0;) {
    acc += tail[i] * tail[i];
    edc[i] = acc;
  }
  for (std::size_t i = 0; i < edc.size(); ++i) {
    if (10.0 * std::log10(edc[i] / edc[0]) <= level_db) return static_cast<double>(i) / kFs;
  }
  return static_cast<double>(edc.size()) / kFs;
}

double T30(const std::vector<double>& tail) {
  std::vector<double> edc(tail.size());
  double acc = 0.0;
  for (std::size_t i = tail.size(); i-- > 0;) {
    acc += tail[i] * tail[i];
    edc[i] = acc;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    const double db = 10.0 * std::log10(edc[i] / edc[0]);
    if (db > -5.0 || db < -35.0) continue;
    const double t = static_cast<double>(i) / kFs;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    n += 1;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -60.0 / slope;
}

Outcome CheckRir() {
  bool ok = true;
  double worst_direct = 0.0;
  std::string decay;
  for (const Geometry& g : {Geometry::TrainingRoom(), Geometry::EvaluationRoom()}) {
    for (double t60 : {0.2, 0.5}) {
      RoomSpec room = g.room;
      room.t60 = t60;
      Rng rng = MakeRng(5, "acceptance-rir", static_cast<std::uint64_t>(t60 * 10));
      double ratio_sum = 0.0, ratio_min = 1e9, ratio_max = 0.0, t30_sum = 0.0;
      const int trials = 5;
      for (int trial = 0; trial < trials; ++trial) {
        Position src;
        for (int a = 0; a < 3; ++a) src[a] = Uniform(rng, 0.5, room.dimensions[a] - 0.5);
        const double d = Distance(src, g.mic1);
        const double expected = d * kFs / room.speed_of_sound;

        const Rir direct = RenderRir(room, src, g.mic1, 0, kFs);
        long peak = direct.start;
        for (std::size_t i = 0; i < direct.taps.size(); ++i) {
          if (std::abs(direct.taps[i]) > std::abs(direct.At(peak))) {
            peak = direct.start + static_cast<long>(i);
          }
        }
        const double err = std::abs(static_cast<double>(peak) - expected);
        worst_direct = std::max(worst_direct, err);
        if (err > 1.0 + (kFractionalDelayLength - 1) / 2) ok = false;

        const Rir rir = RenderRir(room, src, g.mic1, DefaultMaxOrder(room, src, g.mic1), kFs);
        std::vector<double> tail;
        for (long t = static_cast<long>(std::floor(expected));
             t < rir.start + static_cast<long>(rir.taps.size()); ++t) {
          tail.push_back(rir.At(t));
        }
        const double ratio = DecayCrossing(tail, -60.0) / t60;
        ratio_sum += ratio;
        ratio_min = std::min(ratio_min, ratio);
        ratio_max = std::max(ratio_max, ratio);
        t30_sum += T30(tail) / t60;
        if (std::abs(ratio - 1.0) > 0.3) ok = false;
      }
      decay += Format(" %gx%gx%g@%.1fs: -60dB/T60 %.2f [%.2f, %.2f] T30/T60 %.2f;",
                      room.dimensions[0], room.dimensions[1], room.dimensions[2], t60,
                      ratio_sum / trials, ratio_min, ratio_max, t30_sum / trials);
    }
  }
  return {ok, Format("direct-path peak error <= %.2f samples;", worst_direct) + decay};
}

// ---------------------------------------------------------------------------

struct TrainedModel {
  std::unique_ptr<NgccModel> model;
  double seconds = 0.0;
  TrainResult result;
};

TrainedModel TrainDesk(const TrainConfig& config, const SnippetStore& store,
                       const std::string& label, const std::string& prefix) {
  TrainedModel out;
  out.model = std::make_unique<NgccModel>(config.model, config.seed);
  TrainOptions options;
  options.checkpoint_prefix = prefix;
  options.on_epoch = [&](const EpochLog& e) {
    Progress(Format("%s epoch %d lr %.5f train_ce %.4f val_acc %.4f", label.c_str(), e.epoch,
                    e.lr, e.train_ce, e.val_acc));
  };
  const auto start = std::chrono::steady_clock::now();
  out.result = Train(*out.model, config, store, options);
  out.seconds = Seconds(start);
  Progress(Format("%s trained in %.0f s", label.c_str(), out.seconds));
  return out;
}

Outcome CheckExactRecovery(NgccModel& trained) {
  const auto start = std::chrono::steady_clock::now();
  const ModelConfig& c = trained.config();
  ExactnessReport total;
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    NgccModel model(c, 1000 + static_cast<std::uint64_t>(k));
    auto src = trained.classifier().parameters();
    auto dst = model.classifier().parameters();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
    auto src_b = trained.classifier().buffers();
    auto dst_b = model.classifier().buffers();
    for (std::size_t i = 0; i < src_b.size(); ++i) dst_b[i]->value = src_b[i]->value;
    RandomizeSincBands(model.backbone(), rng);
    RandomizeBatchNorms(model.backbone(), rng);
    const Frame x = SpeechFrame(c.frame_length, 500 + static_cast<std::uint64_t>(k));
    const ExactnessReport r = CheckExactness(model, x.samples());
    total.cases += r.cases;
    total.max_deviation = std::max(total.max_deviation, r.max_deviation);
    total.columns_exact += r.columns_exact;
    total.predict_exact += r.predict_exact;
  }
  const double seconds = Seconds(start);
  const bool ok = total.predict_exact == total.cases && total.max_deviation < 1e-6 &&
                  total.columns_exact == total.cases && seconds < 120.0;
  return {ok, Format("100 backbones x 47 lags: predict exact %zu/%zu, columns exact %zu/%zu, "
                     "max deviation %.3g, %.0f s (target < 120 s)",
                     total.predict_exact, total.cases, total.columns_exact, total.cases,
                     total.max_deviation, seconds)};
}

struct CellScores {
  std::vector<GridCell> ngcc, phat;
};

double MeanAcc10(const std::vector<GridCell>& cells) {
  double s = 0.0;
  for (const auto& c : cells) s += c.report.acc_at.at(10.0);
  return s / static_cast<double>(cells.size());
}

std::vector<EvalGrid> RunGrid(std::vector<DelayEstimator*> methods, const SnippetStore& store,
                              const GridConfig& grid,
                              std::vector<std::vector<ScatterRow>>* scatter = nullptr) {
  return EvaluateGrid(methods, store, grid, scatter);
}

int RunCommand(const std::string& args) {
  const std::string cmd = std::string(NGCC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::uint64_t HashFile(const std::string& path) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : ReadFile(path)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

Outcome CheckReproducibility() {
  const std::filesystem::path dir = "acceptance_repro";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string train_json = (dir / "train.json").string();
  WriteFileAtomic(train_json, R"({"version": 1, "preset": "desk", "epochs": 2, "seed": 7,
      "batch_size": 8, "validation_scenes": 16, "synthetic_speakers": 10,
      "snippets_per_speaker": 4, "snippet_seconds": 0.5, "frame_length": 512,
      "sinc_filters": 8, "sinc_kernel": 63, "channels": 4,
      "backbone_hidden_channels": 8, "classifier_channels": 8})");
  const std::string sim_json = (dir / "sim.json").string();
  WriteFileAtomic(sim_json, R"({"version": 1, "scenes": 50, "seed": 7,
      "synthetic_speakers": 10, "snippets_per_speaker": 4})");
  std::uint64_t model_hash[2], json_hash[2], blob_hash[2], manifest_hash[2];
  for (int run = 0; run < 2; ++run) {
    const std::string tag = (dir / ("run" + std::to_string(run))).string();
    if (RunCommand("train --quiet --config " + train_json + " --checkpoint " + tag +
                   "_model --log " + tag + "_log.csv --state " + tag + "_state.bin") != 0 ||
        RunCommand("simulate --config " + sim_json + " --manifest " + tag +
                   ".jsonl --blob " + tag + ".bin") != 0) {
      return {false, "a CLI run failed"};
    }
    model_hash[run] = HashFile(tag + "_model.bin");
    json_hash[run] = HashFile(tag + "_model.json");
    blob_hash[run] = HashFile(tag + ".bin");
    manifest_hash[run] = HashFile(tag + ".jsonl");
  }
  std::filesystem::remove_all(dir);
  const bool ok = model_hash[0] == model_hash[1] && json_hash[0] == json_hash[1] &&
                  blob_hash[0] == blob_hash[1] && manifest_hash[0] == manifest_hash[1];
  return {ok, Format("train checkpoint %016llx/%016llx, simulate blob %016llx/%016llx",
                     static_cast<unsigned long long>(model_hash[0]),
                     static_cast<unsigned long long>(model_hash[1]),
                     static_cast<unsigned long long>(blob_hash[0]),
                     static_cast<unsigned long long>(blob_hash[1]))};
}

}  // namespace
}  // namespace ngcc

// With arguments, only the listed criteria run (criteria 1, 7 and 8 need 6).
int main(int argc, char** argv) {
  using namespace ngcc;
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  std::map<int, Outcome> outcomes;
  auto guarded = [&](int id, const std::function<Outcome()>& check) {
    if (!selected.empty() && !selected.count(id)) return;
    try {
      outcomes[id] = check();
    } catch (const std::exception& e) {
      outcomes[id] = {false, std::string("exception: ") + e.what()};
    }
    Progress(Format("criterion %d %s: %s", id, outcomes[id].pass ? "PASS" : "FAIL",
                    outcomes[id].detail.c_str()));
  };

  guarded(2, CheckEquivariance);
  guarded(3, CheckGccOracle);
  guarded(4, CheckGradients);
  guarded(5, CheckRir);

  const TrainConfig desk = [] {
    TrainConfig c = TrainConfig::DeskScale();
    c.seed = 1;
    return c;
  }();
  const SnippetStore store = MakeSnippetStore(desk);
  Progress(Format("desk preset: %zu parameters, %zu training snippets per epoch",
                  NgccModel(desk.model, 0).ParameterCount(), store.size(Split::kTrain)));

  TrainedModel main_model;
  std::vector<MetricsReport> all_reports;
  std::vector<std::vector<ScatterRow>> main_scatter;
  std::vector<EvalGrid> row_grids;
  const std::vector<double> row_snrs = {0, 6, 12, 18, 24, 30};

  guarded(6, [&]() -> Outcome {
    main_model = TrainDesk(desk, store, "L=16 ce", "acceptance_desk");
    ModelEstimator ngcc(*main_model.model, "ngcc");
    GccEstimator phat(Weighting::Phat(), desk.model.max_lag, "gcc-phat");

    GridConfig anechoic;
    anechoic.snrs_db = {24.0, 30.0};
    anechoic.t60s_s = {0.0};
    anechoic.cell.seed = 98;
    anechoic.cell.scenes = 500;
    const auto a = RunGrid({&ngcc, &phat}, store, anechoic);
    std::size_t exact = 0, total = 0, phat_exact = 0;
    for (std::size_t i = 0; i < a[0].cells.size(); ++i) {
      const auto& r = a[0].cells[i].report;
      exact += static_cast<std::size_t>(std::lround(r.exact * r.n_examples));
      phat_exact += static_cast<std::size_t>(
          std::lround(a[1].cells[i].report.exact * a[1].cells[i].report.n_examples));
      total += r.n_examples;
      all_reports.push_back(r);
      all_reports.push_back(a[1].cells[i].report);
    }
    const double exact_rate = static_cast<double>(exact) / static_cast<double>(total);

    GridConfig row;
    row.snrs_db = row_snrs;
    row.t60s_s = {0.2};
    row.cell.seed = 99;
    row.cell.scenes = 200;
    row_grids = RunGrid({&ngcc, &phat}, store, row, &main_scatter);
    const double snrs[] = {0.0, 6.0, 12.0};
    const double ngcc_acc = MeanAccuracy(row_grids[0], 0.2, snrs);
    const double phat_acc = MeanAccuracy(row_grids[1], 0.2, snrs);
    for (const auto& g : row_grids) {
      for (const auto& c : g.cells) all_reports.push_back(c.report);
    }
    const double margin = 100.0 * (ngcc_acc - phat_acc);
    const bool a_ok = exact_rate > 0.95;
    const bool b_ok = margin >= 2.0;
    const bool time_ok = main_model.seconds < 1800.0;
    return {a_ok && b_ok && time_ok,
            Format("training %.0f s (limit 1800); (a) anechoic SNR>=24 exact %.4f "
                   "(%zu/%zu, need > 0.95; gcc-phat %.4f) %s; (b) T60=0.2 SNR {0,6,12} "
                   "Acc@10cm ngcc %.4f vs gcc-phat %.4f, margin %.2f pp (need >= 2) %s",
                   main_model.seconds, exact_rate, exact, total,
                   static_cast<double>(phat_exact) / static_cast<double>(total),
                   a_ok ? "ok" : "MISSED", ngcc_acc, phat_acc, margin, b_ok ? "ok" : "MISSED")};
  });

  guarded(1, [&]() -> Outcome {
    Require(main_model.model != nullptr, ErrorKind::kInvalidArgument,
            "needs the trained desk model from criterion 6");
    return CheckExactRecovery(*main_model.model);
  });

  guarded(7, [&]() -> Outcome {
    Require(!row_grids.empty(), ErrorKind::kInvalidArgument,
            "needs the desk grid from criterion 6");
    GridConfig row;
    row.snrs_db = row_snrs;
    row.t60s_s = {0.2};
    row.cell.seed = 99;
    row.cell.scenes = 200;
    const double main_acc = MeanAcc10(row_grids[0].cells);

    TrainConfig single = desk;
    single.model.backbone.channels = 1;
    TrainedModel l1 = TrainDesk(single, store, "L=1 ce", "acceptance_desk_l1");
    ModelEstimator l1_est(*l1.model, "ngcc-l1");
    const auto g1 = RunGrid({&l1_est}, store, row);

    TrainConfig mse = desk;
    mse.model.classifier.head = Head::kMseSoftArgmax;
    TrainedModel m = TrainDesk(mse, store, "L=16 mse", "acceptance_desk_mse");
    ModelEstimator mse_est(*m.model, "ngcc-mse");
    const auto gm = RunGrid({&mse_est}, store, row);

    for (const auto& c : g1[0].cells) all_reports.push_back(c.report);
    for (const auto& c : gm[0].cells) all_reports.push_back(c.report);
    const double l1_acc = MeanAcc10(g1[0].cells);
    const double mse_acc = MeanAcc10(gm[0].cells);
    const bool ok = main_acc >= l1_acc && main_acc >= mse_acc;
    return {ok, Format("T60=0.2 mean Acc@10cm over 6 SNRs: L=16 ce %.4f, L=1 ce %.4f "
                       "(diff %+.2f pp), L=16 mse %.4f (diff %+.2f pp)",
                       main_acc, l1_acc, 100.0 * (main_acc - l1_acc), mse_acc,
                       100.0 * (main_acc - mse_acc))};
  });

  guarded(8, [&]() -> Outcome {
    Require(!row_grids.empty(), ErrorKind::kInvalidArgument,
            "needs the desk grid from criterion 6");
    std::size_t bad = 0;
    std::string first_problem;
    for (const auto& r : all_reports) {
      const std::string problem = CheckReport(r);
      if (!problem.empty() && bad++ == 0) first_problem = problem;
    }
    const std::string path = "acceptance_scatter.csv";
    WriteScatterCsv(path, main_scatter[0]);
    const auto rows = ReadScatterCsv(path);
    std::filesystem::remove(path);
    double worst = 0.0;
    for (const auto& cell : row_grids[0].cells) {
      std::vector<ScatterRow> subset;
      for (const auto& row : rows) {
        if (row.snr_db == cell.condition.snr_db && row.t60_s == cell.condition.t60_s) {
          subset.push_back(row);
        }
      }
      const MetricsReport again =
          MetricsFromScatter(subset, DefaultThresholdsCm(), kSpeedOfSound, kFs);
      worst = std::max(worst, std::abs(again.mae_cm - cell.report.mae_cm));
      worst = std::max(worst, std::abs(again.rmse_cm - cell.report.rmse_cm));
      worst = std::max(worst, std::abs(again.exact - cell.report.exact));
      for (const auto& [t, acc] : cell.report.acc_at) {
        worst = std::max(worst, std::abs(again.acc_at.at(t) - acc));
      }
      if (again.n_examples != cell.report.n_examples) worst = 1.0;
    }
    return {bad == 0 && worst <= 1e-9,
            Format("%zu reports checked, %zu inconsistent%s%s; scatter CSV recomputation "
                   "max difference %.3g",
                   all_reports.size(), bad, bad ? ": " : "", first_problem.c_str(), worst)};
  });

  guarded(9, CheckReproducibility);

  static const char* kNames[] = {"",
                                 "exact recovery",
                                 "shift equivariance",
                                 "gcc oracle equivalence",
                                 "gradient correctness",
                                 "rir physicality",
                                 "desk-scale learning",
                                 "ablation directions",
                                 "metrics integrity",
                                 "reproducibility"};
  bool all = true;
  for (int id = 1; id <= 9; ++id) {
    if (!outcomes.count(id)) continue;
    const Outcome& o = outcomes[id];
    all = all && o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, kNames[id],
                o.detail.c_str());
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}
