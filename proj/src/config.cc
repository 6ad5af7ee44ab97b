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

#include "ngcc/config.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "ngcc/checkpoint.h"
#include "ngcc/error.h"

namespace ngcc {

namespace {

const std::vector<ConfigKey> kCommonSourceKeys = {
    {"synthetic_speakers", "int", "50", "number of synthetic speakers"},
    {"snippets_per_speaker", "int", "50", "synthetic snippets per speaker"},
    {"snippet_seconds", "number", "2.0", "length of every source snippet"},
    {"data_dir", "string", "\"\"",
     "directory of <speaker>/*.wav recordings; empty uses synthetic speech"},
};

const std::vector<ConfigKey> kGeometryKeys = {
    {"room_dimensions", "[x, y, z]", "room default", "room size in meters"},
    {"mic1", "[x, y, z]", "room default", "first microphone position in meters"},
    {"mic2", "[x, y, z]", "room default", "second microphone position in meters"},
    {"speed_of_sound", "number", "343", "speed of sound in m/s"},
    {"wall_margin", "number", "0.1", "minimum source distance to any wall in meters"},
};

std::vector<ConfigKey> Concat(std::initializer_list<std::vector<ConfigKey>> parts) {
  std::vector<ConfigKey> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Reads keys from a JSON object and rejects any key not in the registry.
class Reader {
 public:
  Reader(const nlohmann::json& j, const std::vector<ConfigKey>& keys,
         const std::string& what)
      : j_(j), what_(what) {
    Require(j.is_object(), ErrorKind::kConfig, what + " config must be a JSON object");
    std::set<std::string> known;
    for (const auto& k : keys) known.insert(k.name);
    for (const auto& [key, value] : j.items()) {
      Require(known.contains(key), ErrorKind::kConfig,
              "unknown " + what + " config key '" + key + "'");
    }
    Require(j.contains("version"), ErrorKind::kConfig,
            what + " config needs a \"version\" field");
    const auto& v = j.at("version");
    Require(v.is_number_integer() && v.get<int>() == kConfigVersion, ErrorKind::kConfig,
            what + " config version must be " + std::to_string(kConfigVersion));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void Get(const std::string& key, T& out) const {
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::kConfig,
                  "config key '" + key + "' has the wrong type: " + j_.at(key).dump());
    }
  }

  void Range(const std::string& key, std::pair<double, double>& out) const {
    if (!j_.contains(key)) return;
    std::vector<double> v;
    Get(key, v);
    Require(v.size() == 2 && v[0] <= v[1], ErrorKind::kConfig,
            "config key '" + key + "' must be [low, high] with low <= high");
    out = {v[0], v[1]};
  }

  void Count(const std::string& key, std::size_t& out) const {
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    Require(v.is_number_integer() && v.get<long long>() >= 0, ErrorKind::kConfig,
            "config key '" + key + "' must be a non-negative integer");
    out = v.get<std::size_t>();
  }

 private:
  const nlohmann::json& j_;
  std::string what_;
};

void ReadGeometry(const Reader& r, Geometry& g, double& wall_margin) {
  r.Get("room_dimensions", g.room.dimensions);
  r.Get("mic1", g.mic1);
  r.Get("mic2", g.mic2);
  r.Get("speed_of_sound", g.room.speed_of_sound);
  r.Get("wall_margin", wall_margin);
  Require(g.room.speed_of_sound > 0.0, ErrorKind::kConfig,
          "speed_of_sound must be positive");
}

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw Error(ErrorKind::kConfig, "unknown split '" + name + "'");
}

}  // namespace

const std::vector<ConfigKey>& TrainConfigKeys() {
  static const std::vector<ConfigKey> keys = Concat(
      {{{"version", "int", "required", "config format version, must be 1"},
        {"preset", "string", "\"desk\"",
         "\"desk\" (small model, 5 epochs) or \"paper\" (full model, 30 epochs)"},
        {"seed", "int", "0", "base seed for data, initialization and batch order"},
        {"epochs", "int", "preset", "training epochs"},
        {"batch_size", "int", "32", "examples per optimizer step (>= 2)"},
        {"learning_rate", "number", "0.001", "peak learning rate of the cosine schedule"},
        {"snr_range_db", "[lo, hi]", "[0, 30]", "uniform SNR range of training scenes"},
        {"t60_range_s", "[lo, hi]", "[0.2, 1.0]", "uniform T60 range of training scenes"},
        {"anechoic", "bool", "false", "anechoic, noise-free scenes (debugging)"},
        {"swap_probability", "number", "0.5", "chance of exchanging the microphones"},
        {"validation_scenes", "int", "200", "fixed validation scenes for model selection"},
        {"use_sinc", "bool", "true", "band-pass filter bank as the first layer"},
        {"sinc_filters", "int", "preset", "filters in the first layer"},
        {"sinc_kernel", "int", "preset", "odd kernel length of the first layer"},
        {"backbone_kernels", "[int]", "[11, 9, 7]", "kernel lengths of the backbone convolutions"},
        {"backbone_hidden_channels", "int", "preset", "channels between backbone convolutions"},
        {"channels", "int", "preset", "filtered channels L correlated per microphone"},
        {"classifier_kernels", "[int]", "[11, 9, 7, 5]", "kernel lengths of the lag classifier"},
        {"classifier_channels", "int", "preset", "hidden channels of the lag classifier"},
        {"head", "string", "\"ce\"", "\"ce\" (cross entropy) or \"mse\" (soft-argmax)"},
        {"frame_length", "int", "2048", "samples per analysis window (power of two)"},
        {"sample_rate", "number", "16000", "sample rate in Hz"},
        {"leaky_slope", "number", "0.01", "negative slope of the leaky rectifiers"},
        {"bn_momentum", "number", "0.1", "batchnorm running-statistics momentum"},
        {"bn_epsilon", "number", "1e-05", "batchnorm variance epsilon"},
        {"checkpoint", "string", "\"model\"", "checkpoint prefix (.json and .bin)"},
        {"log", "string", "\"train_log.csv\"", "per-epoch CSV log"},
        {"state", "string", "\"train_state.bin\"", "resume state written every epoch"}},
       kGeometryKeys,
       kCommonSourceKeys});
  return keys;
}

const std::vector<ConfigKey>& SimulateConfigKeys() {
  static const std::vector<ConfigKey> keys = Concat(
      {{{"version", "int", "required", "config format version, must be 1"},
        {"seed", "int", "0", "base seed for sources and scenes"},
        {"scenes", "int", "100", "number of scenes to simulate"},
        {"split", "string", "\"train\"", "source split: train, validation or test"},
        {"snr_range_db", "[lo, hi]", "[0, 30]", "uniform SNR range"},
        {"t60_range_s", "[lo, hi]", "[0.2, 1.0]", "uniform T60 range"},
        {"anechoic", "bool", "false", "anechoic, noise-free scenes"},
        {"frame_length", "int", "2048", "samples per window (power of two)"},
        {"sample_rate", "number", "16000", "sample rate in Hz"},
        {"manifest", "string", "\"dataset.jsonl\"", "output JSON-lines manifest"},
        {"blob", "string", "\"dataset.bin\"", "output float32 sample blob"}},
       kGeometryKeys,
       kCommonSourceKeys});
  return keys;
}

const std::vector<ConfigKey>& EvalConfigKeys() {
  static const std::vector<ConfigKey> keys = Concat(
      {{{"version", "int", "required", "config format version, must be 1"},
        {"seed", "int", "0", "seed of the evaluation scenes"},
        {"source_seed", "int", "0", "seed of the snippet store (match the training seed)"},
        {"checkpoint", "string", "\"\"", "checkpoint prefix of the model to evaluate"},
        {"baselines", "[string]", "[\"phat\"]",
         "GCC weightings evaluated alongside: none, phat, beta:<b>"},
        {"snrs_db", "[number]", "[0, 6, 12, 18, 24, 30]", "SNR levels of the grid"},
        {"t60s_s", "[number]", "[0.2, 0.4, 0.6, 0.8, 1.0]",
         "T60 levels of the grid; 0 is anechoic"},
        {"scenes_per_cell", "int", "200", "scenes per grid cell"},
        {"windows_per_scene", "int", "1", "analysis windows per scene"},
        {"thresholds_cm", "[number]", "[2.5, 5, 7.5, 10, 15, 20, 30, 50, 100]",
         "accuracy thresholds in cm"},
        {"non_silent_only", "bool", "false", "drop silent windows before scoring"},
        {"frame_length", "int", "2048", "samples per window (power of two)"},
        {"sample_rate", "number", "16000", "sample rate in Hz"},
        {"batch_size", "int", "32", "model inference batch size"},
        {"scatter", "bool", "true", "write per-method scatter CSVs"},
        {"output_dir", "string", "\".\"", "directory for grid, sweep and scatter CSVs"}},
       kGeometryKeys,
       kCommonSourceKeys});
  return keys;
}

std::string DescribeConfigKeys(const std::vector<ConfigKey>& keys) {
  std::size_t w_name = 0, w_type = 0, w_def = 0;
  for (const auto& k : keys) {
    w_name = std::max(w_name, k.name.size());
    w_type = std::max(w_type, k.type.size());
    w_def = std::max(w_def, k.default_value.size());
  }
  std::string out;
  for (const auto& k : keys) {
    out += "  " + k.name + std::string(w_name - k.name.size() + 2, ' ') + k.type +
           std::string(w_type - k.type.size() + 2, ' ') + k.default_value +
           std::string(w_def - k.default_value.size() + 2, ' ') + k.help + "\n";
  }
  return out;
}

nlohmann::json LoadConfigFile(const std::string& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, e.what());
  }
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, "cannot parse " + path + ": " + e.what());
  }
}

TrainRun ParseTrainConfig(const nlohmann::json& j) {
  const Reader r(j, TrainConfigKeys(), "train");
  std::string preset = "desk";
  r.Get("preset", preset);
  TrainRun run;
  if (preset == "desk") {
    run.train = TrainConfig::DeskScale();
  } else if (preset == "paper") {
    run.train = TrainConfig::PaperScale();
  } else {
    throw Error(ErrorKind::kConfig, "unknown preset '" + preset + "'");
  }
  TrainConfig& t = run.train;
  ModelConfig& m = t.model;
  r.Get("seed", t.seed);
  r.Get("epochs", t.epochs);
  r.Count("batch_size", t.batch_size);
  r.Get("learning_rate", t.learning_rate);
  r.Range("snr_range_db", t.ranges.snr_db);
  r.Range("t60_range_s", t.ranges.t60_s);
  r.Get("anechoic", t.anechoic);
  r.Get("swap_probability", t.swap_probability);
  r.Count("validation_scenes", t.validation_scenes);
  r.Get("use_sinc", m.backbone.use_sinc);
  r.Get("sinc_filters", m.backbone.sinc_filters);
  r.Get("sinc_kernel", m.backbone.sinc_kernel);
  r.Get("backbone_kernels", m.backbone.kernels);
  r.Get("backbone_hidden_channels", m.backbone.hidden_channels);
  r.Get("channels", m.backbone.channels);
  r.Get("classifier_kernels", m.classifier.kernels);
  r.Get("classifier_channels", m.classifier.hidden_channels);
  if (r.has("head")) {
    std::string head;
    r.Get("head", head);
    m.classifier.head = ParseHead(head);
  }
  r.Get("frame_length", m.frame_length);
  r.Get("sample_rate", m.sample_rate);
  r.Get("leaky_slope", m.leaky_slope);
  r.Get("bn_momentum", m.bn_momentum);
  r.Get("bn_epsilon", m.bn_epsilon);
  ReadGeometry(r, t.geometry, t.ranges.wall_margin);
  r.Count("synthetic_speakers", t.synthetic_speakers);
  r.Count("snippets_per_speaker", t.snippets_per_speaker);
  r.Get("snippet_seconds", t.snippet_seconds);
  r.Get("data_dir", t.data_dir);
  run.checkpoint = "model";
  run.log = "train_log.csv";
  run.state = "train_state.bin";
  r.Get("checkpoint", run.checkpoint);
  r.Get("log", run.log);
  r.Get("state", run.state);
  m.max_lag = t.geometry.max_lag(m.sample_rate);
  t.Validate();
  return run;
}

SimulateRun ParseSimulateConfig(const nlohmann::json& j) {
  const Reader r(j, SimulateConfigKeys(), "simulate");
  SimulateRun run;
  SimulateConfig& s = run.simulate;
  r.Get("seed", s.seed);
  r.Count("scenes", s.scenes);
  if (r.has("split")) {
    std::string split;
    r.Get("split", split);
    s.split = ParseSplit(split);
  }
  r.Range("snr_range_db", s.ranges.snr_db);
  r.Range("t60_range_s", s.ranges.t60_s);
  r.Get("anechoic", s.anechoic);
  r.Count("frame_length", s.frame_length);
  r.Get("sample_rate", s.sample_rate);
  ReadGeometry(r, s.geometry, s.ranges.wall_margin);
  r.Count("synthetic_speakers", s.synthetic_speakers);
  r.Count("snippets_per_speaker", s.snippets_per_speaker);
  r.Get("snippet_seconds", s.snippet_seconds);
  r.Get("data_dir", s.data_dir);
  r.Get("manifest", run.manifest);
  r.Get("blob", run.blob);
  s.Validate();
  return run;
}

EvalRun ParseEvalConfig(const nlohmann::json& j) {
  const Reader r(j, EvalConfigKeys(), "eval");
  EvalRun run;
  GridConfig& g = run.grid;
  r.Get("seed", g.cell.seed);
  r.Get("source_seed", run.source_seed);
  r.Get("checkpoint", run.checkpoint);
  r.Get("baselines", run.baselines);
  for (const auto& b : run.baselines) Weighting::Parse(b);
  r.Get("snrs_db", g.snrs_db);
  r.Get("t60s_s", g.t60s_s);
  r.Count("scenes_per_cell", g.cell.scenes);
  r.Count("windows_per_scene", g.cell.windows_per_scene);
  r.Get("thresholds_cm", g.thresholds_cm);
  r.Get("non_silent_only", g.non_silent_only);
  r.Count("frame_length", g.cell.frame_length);
  r.Get("sample_rate", g.cell.sample_rate);
  r.Count("batch_size", run.batch_size);
  r.Get("scatter", run.scatter);
  r.Get("output_dir", run.output_dir);
  ReadGeometry(r, g.cell.geometry, g.cell.wall_margin);
  r.Count("synthetic_speakers", run.synthetic_speakers);
  r.Count("snippets_per_speaker", run.snippets_per_speaker);
  r.Get("snippet_seconds", run.snippet_seconds);
  r.Get("data_dir", run.data_dir);

  Require(!g.snrs_db.empty() && !g.t60s_s.empty(), ErrorKind::kConfig,
          "snrs_db and t60s_s must be nonempty");
  for (double t : g.t60s_s) {
    Require(t >= 0.0, ErrorKind::kConfig, "t60 levels must be >= 0");
  }
  Require(!g.thresholds_cm.empty(), ErrorKind::kConfig, "thresholds_cm must be nonempty");
  Require(g.cell.scenes >= 1 && g.cell.windows_per_scene >= 1 && run.batch_size >= 1,
          ErrorKind::kConfig, "scene, window and batch counts must be >= 1");
  Require(IsPowerOfTwo(g.cell.frame_length), ErrorKind::kConfig,
          "frame_length must be a power of two");
  g.cell.geometry.room.Validate();
  Require(g.cell.geometry.room.Contains(g.cell.geometry.mic1) &&
              g.cell.geometry.room.Contains(g.cell.geometry.mic2),
          ErrorKind::kConfig, "microphones must lie inside the room");
  Require(!run.checkpoint.empty() || !run.baselines.empty(), ErrorKind::kConfig,
          "nothing to evaluate: set checkpoint or baselines");
  return run;
}

}  // namespace ngcc
