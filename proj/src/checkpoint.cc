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

#include "ngcc/checkpoint.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ngcc/error.h"

namespace ngcc {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written in host order");

namespace {

constexpr char kStateMagic[8] = {'N', 'G', 'C', 'C', 'S', 'T', 'A', 'T'};

nlohmann::json TensorEntry(const nn::Parameter& p, const char* kind,
                           std::size_t offset) {
  return {{"name", p.name},
          {"shape", p.shape},
          {"kind", kind},
          {"offset", offset},
          {"count", p.size()}};
}

std::vector<nn::Parameter*> AllTensors(NgccModel& model) {
  auto out = model.parameters();
  for (auto* b : model.buffers()) out.push_back(b);
  return out;
}

template <typename T>
void Append(std::string& bytes, const T& value) {
  const char* p = reinterpret_cast<const char*>(&value);
  bytes.append(p, sizeof(T));
}

template <typename T>
T Take(const std::string& bytes, std::size_t& pos) {
  Require(pos + sizeof(T) <= bytes.size(), ErrorKind::kInvalidData,
          "training state is truncated");
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::string ManifestPath(const std::string& prefix) { return prefix + ".json"; }
std::string BlobPath(const std::string& prefix) { return prefix + ".bin"; }

void WriteFileAtomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    Require(out.good(), ErrorKind::kIo, "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    Require(out.good(), ErrorKind::kIo, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  Require(!ec, ErrorKind::kIo, "cannot rename " + tmp + ": " + ec.message());
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void SaveCheckpoint(NgccModel& model, const std::string& prefix,
                    const nlohmann::json& metadata) {
  nlohmann::json tensors = nlohmann::json::array();
  std::string blob;
  std::size_t offset = 0;
  auto add = [&](const nn::Parameter& p, const char* kind) {
    tensors.push_back(TensorEntry(p, kind, offset));
    for (double v : p.value) Append(blob, static_cast<float>(v));
    offset += p.size();
  };
  for (auto* p : model.parameters()) add(*p, "parameter");
  for (auto* b : model.buffers()) add(*b, "buffer");

  nlohmann::json manifest = {
      {"format_version", kCheckpointFormatVersion},
      {"dtype", "float32"},
      {"byte_order", "little"},
      {"model", model.config().ToJson()},
      {"layers", model.Describe()},
      {"tensors", tensors},
      {"total_count", offset},
      {"metadata", metadata}};
  WriteFileAtomic(BlobPath(prefix), blob);
  WriteFileAtomic(ManifestPath(prefix), manifest.dump(2) + "\n");
}

nlohmann::json ReadManifest(const std::string& prefix) {
  const std::string text = ReadFile(ManifestPath(prefix));
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidData, "malformed checkpoint manifest: " +
                                             std::string(e.what()));
  }
  Require(manifest.value("format_version", -1) == kCheckpointFormatVersion,
          ErrorKind::kInvalidData, "unsupported checkpoint format version");
  return manifest;
}

void LoadCheckpointInto(NgccModel& model, const std::string& prefix) {
  const nlohmann::json manifest = ReadManifest(prefix);
  const std::string blob = ReadFile(BlobPath(prefix));
  auto tensors = AllTensors(model);
  const auto& entries = manifest.at("tensors");
  Require(entries.size() == tensors.size(), ErrorKind::kInvalidData,
          "checkpoint holds " + std::to_string(entries.size()) +
              " tensors, model expects " + std::to_string(tensors.size()));
  const std::size_t total = manifest.at("total_count").get<std::size_t>();
  Require(blob.size() == total * sizeof(float), ErrorKind::kInvalidData,
          "checkpoint blob size does not match the manifest");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    nn::Parameter& p = *tensors[i];
    const auto& e = entries[i];
    const auto shape = e.at("shape").get<std::vector<std::size_t>>();
    Require(e.at("name").get<std::string>() == p.name && shape == p.shape,
            ErrorKind::kInvalidData,
            "tensor " + e.at("name").get<std::string>() +
                " does not match model tensor " + p.name);
    const std::size_t off = e.at("offset").get<std::size_t>();
    const std::size_t count = e.at("count").get<std::size_t>();
    Require(count == p.size() && off + count <= total, ErrorKind::kInvalidData,
            "tensor " + p.name + " has an invalid extent");
    for (std::size_t k = 0; k < count; ++k) {
      float v;
      std::memcpy(&v, blob.data() + (off + k) * sizeof(float), sizeof(float));
      p.value[k] = v;
    }
  }
}

std::unique_ptr<NgccModel> LoadCheckpoint(const std::string& prefix) {
  const nlohmann::json manifest = ReadManifest(prefix);
  auto model = std::make_unique<NgccModel>(
      ModelConfig::FromJson(manifest.at("model")), 0);
  LoadCheckpointInto(*model, prefix);
  return model;
}

void SaveTrainingState(const std::string& path, NgccModel& model, Adam& adam,
                       const TrainingState& state) {
  auto tensors = AllTensors(model);
  nlohmann::json header = {{"next_epoch", state.next_epoch},
                           {"adam_step", adam.step_count()},
                           {"info", state.info},
                           {"model", model.config().ToJson()}};
  nlohmann::json sizes = nlohmann::json::array();
  for (auto* p : tensors) sizes.push_back({p->name, p->size()});
  header["tensors"] = sizes;
  const std::string text = header.dump();

  std::string bytes(kStateMagic, sizeof(kStateMagic));
  Append(bytes, static_cast<std::uint64_t>(text.size()));
  bytes += text;
  for (auto* p : tensors) {
    for (double v : p->value) Append(bytes, v);
  }
  for (std::size_t k = 0; k < adam.first_moments().size(); ++k) {
    for (double v : adam.first_moments()[k]) Append(bytes, v);
    for (double v : adam.second_moments()[k]) Append(bytes, v);
  }
  WriteFileAtomic(path, bytes);
}

TrainingState LoadTrainingState(const std::string& path, NgccModel& model,
                                Adam& adam) {
  const std::string bytes = ReadFile(path);
  Require(bytes.size() > sizeof(kStateMagic) &&
              std::memcmp(bytes.data(), kStateMagic, sizeof(kStateMagic)) == 0,
          ErrorKind::kInvalidData, path + " is not a training state file");
  std::size_t pos = sizeof(kStateMagic);
  const auto len = Take<std::uint64_t>(bytes, pos);
  Require(pos + len <= bytes.size(), ErrorKind::kInvalidData, "truncated state header");
  const nlohmann::json header = nlohmann::json::parse(bytes.substr(pos, len));
  pos += len;
  Require(header.at("model") == model.config().ToJson(), ErrorKind::kInvalidData,
          "training state was written for a different model config");
  auto tensors = AllTensors(model);
  const auto& sizes = header.at("tensors");
  Require(sizes.size() == tensors.size(), ErrorKind::kInvalidData,
          "training state tensor count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    Require(sizes[i][0].get<std::string>() == tensors[i]->name &&
                sizes[i][1].get<std::size_t>() == tensors[i]->size(),
            ErrorKind::kInvalidData, "training state tensor mismatch at " + tensors[i]->name);
  }
  for (auto* p : tensors) {
    for (double& v : p->value) v = Take<double>(bytes, pos);
  }
  for (std::size_t k = 0; k < adam.first_moments().size(); ++k) {
    for (double& v : adam.first_moments()[k]) v = Take<double>(bytes, pos);
    for (double& v : adam.second_moments()[k]) v = Take<double>(bytes, pos);
  }
  Require(pos == bytes.size(), ErrorKind::kInvalidData, "trailing bytes in training state");
  adam.set_step_count(header.at("adam_step").get<std::int64_t>());
  return {header.at("next_epoch").get<int>(), header.at("info")};
}

}  // namespace ngcc
