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

#include "ngcc/dataset.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "ngcc/checkpoint.h"
#include "ngcc/error.h"
#include "ngcc/parallel.h"

namespace ngcc {

namespace {

nlohmann::json NumberOrString(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double ParseNumber(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::kInvalidData, "expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace

void SimulateConfig::Validate() const {
  Require(scenes >= 1, ErrorKind::kConfig, "scenes must be >= 1");
  Require(IsPowerOfTwo(frame_length), ErrorKind::kConfig,
          "frame_length must be a power of two");
  Require(snippet_seconds * sample_rate >= static_cast<double>(frame_length),
          ErrorKind::kConfig, "snippets must be at least one frame long");
  Require(ranges.t60_s.first <= ranges.t60_s.second &&
              ranges.snr_db.first <= ranges.snr_db.second,
          ErrorKind::kConfig, "sampling ranges must be nonempty");
  Require(anechoic || ranges.t60_s.first > 0.0, ErrorKind::kConfig,
          "t60 range must be positive");
  geometry.room.Validate();
  Require(geometry.room.Contains(geometry.mic1) && geometry.room.Contains(geometry.mic2),
          ErrorKind::kConfig, "microphones must lie inside the room");
}

nlohmann::json DatasetRecord::ToJson() const {
  const RoomSpec& room = scene.room;
  return {{"index", index},
          {"room_dimensions", room.dimensions},
          {"t60_s", room.t60},
          {"speed_of_sound", room.speed_of_sound},
          {"mic1", scene.mic1},
          {"mic2", scene.mic2},
          {"source", scene.source},
          {"snr_db", NumberOrString(scene.snr_db)},
          {"seed", scene.seed},
          {"true_delay_samples", scene.true_delay_samples},
          {"label", label},
          {"frame_offset", frame_offset},
          {"frame_length", frame_length},
          {"sample_rate", sample_rate},
          {"x1_offset", x1_offset},
          {"x2_offset", x2_offset}};
}

DatasetRecord DatasetRecord::FromJson(const nlohmann::json& j) {
  DatasetRecord r;
  try {
    r.index = j.at("index").get<std::size_t>();
    r.scene.room.dimensions = j.at("room_dimensions").get<std::array<double, 3>>();
    r.scene.room.t60 = j.at("t60_s").get<double>();
    r.scene.room.speed_of_sound = j.at("speed_of_sound").get<double>();
    r.scene.mic1 = j.at("mic1").get<Position>();
    r.scene.mic2 = j.at("mic2").get<Position>();
    r.scene.source = j.at("source").get<Position>();
    r.scene.snr_db = ParseNumber(j.at("snr_db"));
    r.scene.seed = j.at("seed").get<std::uint64_t>();
    r.scene.true_delay_samples = j.at("true_delay_samples").get<int>();
    r.label = j.at("label").get<int>();
    r.frame_offset = j.at("frame_offset").get<std::size_t>();
    r.frame_length = j.at("frame_length").get<std::size_t>();
    r.sample_rate = j.at("sample_rate").get<double>();
    r.x1_offset = j.at("x1_offset").get<std::uint64_t>();
    r.x2_offset = j.at("x2_offset").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidData, std::string("bad manifest record: ") + e.what());
  }
  return r;
}

std::vector<DatasetRecord> Simulate(const SimulateConfig& config,
                                    const std::string& manifest_path,
                                    const std::string& blob_path) {
  config.Validate();
  TrainConfig tc;
  tc.seed = config.seed;
  tc.geometry = config.geometry;
  tc.ranges = config.ranges;
  tc.anechoic = config.anechoic;
  tc.model.frame_length = config.frame_length;
  tc.model.sample_rate = config.sample_rate;
  tc.model.max_lag = config.geometry.max_lag(config.sample_rate);
  tc.synthetic_speakers = config.synthetic_speakers;
  tc.snippets_per_speaker = config.snippets_per_speaker;
  tc.snippet_seconds = config.snippet_seconds;
  tc.data_dir = config.data_dir;
  const SnippetStore store = MakeSnippetStore(tc);
  const std::size_t available = store.size(config.split);
  Require(available > 0, ErrorKind::kInvalidData,
          std::string("split ") + SplitName(config.split) + " is empty");

  struct Slot {
    std::optional<TrainingExample> example;
  };
  std::vector<Slot> slots(config.scenes);
  ParallelFor(config.scenes, [&](std::size_t i) {
    Rng rng = MakeRng(config.seed, "simulate", i);
    const std::vector<double> snippet = store.Get(config.split, i % available);
    slots[i].example = MakeTrainingExample(snippet, tc, rng);
  });

  std::vector<DatasetRecord> records;
  std::string blob, manifest;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].example) continue;
    const TrainingExample& ex = *slots[i].example;
    DatasetRecord r;
    r.index = i;
    r.scene = ex.scene;
    r.label = ex.label;
    r.frame_offset = ex.frame_offset;
    r.frame_length = config.frame_length;
    r.sample_rate = config.sample_rate;
    r.x1_offset = blob.size();
    for (double v : ex.frames.x1.samples()) {
      const float f = static_cast<float>(v);
      blob.append(reinterpret_cast<const char*>(&f), sizeof(f));
    }
    r.x2_offset = blob.size();
    for (double v : ex.frames.x2.samples()) {
      const float f = static_cast<float>(v);
      blob.append(reinterpret_cast<const char*>(&f), sizeof(f));
    }
    manifest += r.ToJson().dump() + "\n";
    records.push_back(r);
  }
  WriteFileAtomic(blob_path, blob);
  WriteFileAtomic(manifest_path, manifest);
  return records;
}

std::vector<DatasetRecord> ReadDatasetManifest(const std::string& path) {
  std::istringstream in(ReadFile(path));
  std::vector<DatasetRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInvalidData, std::string("bad manifest line: ") + e.what());
    }
    out.push_back(DatasetRecord::FromJson(j));
  }
  return out;
}

FramePair ReadDatasetFrames(const std::string& blob_path, const DatasetRecord& record) {
  std::ifstream in(blob_path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open " + blob_path);
  auto read = [&](std::uint64_t offset) {
    std::vector<float> buf(record.frame_length);
    in.seekg(static_cast<std::streamoff>(offset));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    Require(in.good(), ErrorKind::kInvalidData, "blob too short for record " +
                                                    std::to_string(record.index));
    return Frame(std::vector<double>(buf.begin(), buf.end()), record.sample_rate);
  };
  Frame x1 = read(record.x1_offset);
  Frame x2 = read(record.x2_offset);
  return {std::move(x1), std::move(x2)};
}

}  // namespace ngcc
