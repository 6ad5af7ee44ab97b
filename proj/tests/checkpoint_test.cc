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

#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ngcc/error.h"
#include "ngcc/model.h"
#include "ngcc/optim.h"

namespace ngcc {
namespace {

namespace fs = std::filesystem;

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ngcc_ckpt_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

ModelConfig SmallConfig() {
  ModelConfig c = ModelConfig::DeskScale();
  c.backbone.sinc_filters = 4;
  c.backbone.sinc_kernel = 31;
  c.backbone.hidden_channels = 4;
  c.backbone.channels = 4;
  c.classifier.hidden_channels = 4;
  c.frame_length = 256;
  c.max_lag = 8;
  return c;
}

void Perturb(NgccModel& model, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (auto* p : model.buffers()) {
    for (double& v : p->value) v = u(rng);
  }
  for (auto* p : model.parameters()) {
    for (double& v : p->value) v *= u(rng);
  }
}

Frame RandomFrame(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return Frame(x, 16000.0);
}

TEST_F(CheckpointTest, RoundTripIsFloatFaithful) {
  NgccModel model(SmallConfig(), 3);
  Perturb(model, 3);
  const std::string prefix = Path("model");
  SaveCheckpoint(model, prefix, {{"epoch", 4}});
  std::unique_ptr<NgccModel> loaded = LoadCheckpoint(prefix);
  EXPECT_EQ(loaded->config().ToJson(), model.config().ToJson());
  auto a = model.parameters(), b = loaded->parameters();
  auto ab = model.buffers(), bb = loaded->buffers();
  a.insert(a.end(), ab.begin(), ab.end());
  b.insert(b.end(), bb.begin(), bb.end());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i]->size(), b[i]->size());
    for (std::size_t j = 0; j < a[i]->size(); ++j) {
      EXPECT_EQ(b[i]->value[j], static_cast<double>(static_cast<float>(a[i]->value[j])));
    }
  }
  const Frame x2 = RandomFrame(256, 1);
  const Frame x1 = CircularShift(x2, 3);
  const auto pa = model.Predict(x1, x2);
  const auto pb = loaded->Predict(x1, x2);
  EXPECT_EQ(pa.delay, pb.delay);
  for (int k = -8; k <= 8; ++k) EXPECT_NEAR(pa.posterior.at(k), pb.posterior.at(k), 1e-4);
}

TEST_F(CheckpointTest, ManifestDescribesBlob) {
  NgccModel model(SmallConfig(), 4);
  const std::string prefix = Path("model");
  SaveCheckpoint(model, prefix, {{"note", "x"}});
  const nlohmann::json m = ReadManifest(prefix);
  EXPECT_EQ(m["format_version"], 1);
  EXPECT_EQ(m["dtype"], "float32");
  EXPECT_EQ(m["byte_order"], "little");
  EXPECT_EQ(m["metadata"]["note"], "x");
  EXPECT_TRUE(m["layers"].contains("backbone"));
  std::size_t offset = 0;
  std::size_t parameters = 0;
  for (const auto& t : m["tensors"]) {
    EXPECT_EQ(t["offset"].get<std::size_t>(), offset);
    std::size_t count = 1;
    for (const auto& d : t["shape"]) count *= d.get<std::size_t>();
    EXPECT_EQ(t["count"].get<std::size_t>(), count);
    if (t["kind"] == "parameter") parameters += count;
    offset += count;
  }
  EXPECT_EQ(m["total_count"].get<std::size_t>(), offset);
  EXPECT_EQ(parameters, model.ParameterCount());
  EXPECT_EQ(fs::file_size(BlobPath(prefix)), offset * sizeof(float));

  // First tensor, first value, decoded by hand as little-endian float32.
  std::ifstream in(BlobPath(prefix), std::ios::binary);
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  const std::uint32_t bits = bytes[0] | (bytes[1] << 8) | (bytes[2] << 16) |
                             (static_cast<std::uint32_t>(bytes[3]) << 24);
  float value;
  std::memcpy(&value, &bits, 4);
  EXPECT_EQ(value, static_cast<float>(model.parameters()[0]->value[0]));
}

TEST_F(CheckpointTest, SavingIsDeterministic) {
  NgccModel model(SmallConfig(), 5);
  SaveCheckpoint(model, Path("a"));
  SaveCheckpoint(model, Path("b"));
  EXPECT_EQ(ReadFile(BlobPath(Path("a"))), ReadFile(BlobPath(Path("b"))));
  EXPECT_EQ(ReadFile(ManifestPath(Path("a"))), ReadFile(ManifestPath(Path("b"))));
}

TEST_F(CheckpointTest, ShapeMismatchIsRejected) {
  NgccModel model(SmallConfig(), 6);
  SaveCheckpoint(model, Path("model"));
  ModelConfig other = SmallConfig();
  other.backbone.channels = 5;
  NgccModel wrong(other, 6);
  try {
    LoadCheckpointInto(wrong, Path("model"));
    FAIL() << "expected a shape mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidData);
  }
}

TEST_F(CheckpointTest, CorruptFilesAreRejected) {
  NgccModel model(SmallConfig(), 7);
  const std::string prefix = Path("model");
  SaveCheckpoint(model, prefix);
  const std::string blob = ReadFile(BlobPath(prefix));
  WriteFileAtomic(BlobPath(prefix), blob.substr(0, blob.size() - 4));
  EXPECT_THROW(LoadCheckpoint(prefix), Error);
  WriteFileAtomic(BlobPath(prefix), blob);
  EXPECT_NO_THROW(LoadCheckpoint(prefix));

  nlohmann::json m = ReadManifest(prefix);
  m["format_version"] = 2;
  WriteFileAtomic(ManifestPath(prefix), m.dump());
  EXPECT_THROW(LoadCheckpoint(prefix), Error);
  WriteFileAtomic(ManifestPath(prefix), "{ not json");
  EXPECT_THROW(LoadCheckpoint(prefix), Error);
  try {
    LoadCheckpoint(Path("missing"));
    FAIL() << "expected an io error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST_F(CheckpointTest, TrainingStateRoundTripIsExact) {
  NgccModel model(SmallConfig(), 8);
  Perturb(model, 8);
  Adam adam(model.parameters());
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d;
  for (auto& m : adam.first_moments()) for (double& v : m) v = d(rng);
  for (auto& m : adam.second_moments()) for (double& v : m) v = std::abs(d(rng));
  adam.set_step_count(123);
  TrainingState state;
  state.next_epoch = 3;
  state.info = {{"best_val", 0.75}};
  const std::string path = Path("state.bin");
  SaveTrainingState(path, model, adam, state);

  NgccModel other(SmallConfig(), 99);
  Adam other_adam(other.parameters());
  const TrainingState loaded = LoadTrainingState(path, other, other_adam);
  EXPECT_EQ(loaded.next_epoch, 3);
  EXPECT_EQ(loaded.info["best_val"], 0.75);
  EXPECT_EQ(other_adam.step_count(), 123);
  EXPECT_EQ(other_adam.first_moments(), adam.first_moments());
  EXPECT_EQ(other_adam.second_moments(), adam.second_moments());
  auto a = model.parameters(), b = other.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->value, b[i]->value);
  auto ab = model.buffers(), bb = other.buffers();
  for (std::size_t i = 0; i < ab.size(); ++i) EXPECT_EQ(ab[i]->value, bb[i]->value);
  EXPECT_EQ(ReadFile(path).substr(0, 8), "NGCCSTAT");
}

TEST_F(CheckpointTest, TrainingStateRejectsOtherModels) {
  NgccModel model(SmallConfig(), 9);
  Adam adam(model.parameters());
  SaveTrainingState(Path("state.bin"), model, adam, TrainingState{});
  ModelConfig cfg = SmallConfig();
  cfg.classifier.head = Head::kMseSoftArgmax;
  NgccModel other(cfg, 9);
  Adam other_adam(other.parameters());
  EXPECT_THROW(LoadTrainingState(Path("state.bin"), other, other_adam), Error);
  std::string bytes = ReadFile(Path("state.bin"));
  bytes.push_back('x');
  WriteFileAtomic(Path("state.bin"), bytes);
  EXPECT_THROW(LoadTrainingState(Path("state.bin"), model, adam), Error);
}

TEST_F(CheckpointTest, AtomicWriteLeavesNoTemporaries) {
  const std::string path = Path("file.txt");
  WriteFileAtomic(path, "first");
  WriteFileAtomic(path, "second");
  EXPECT_EQ(ReadFile(path), "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir_)) ++entries;
  EXPECT_EQ(entries, 1u);
}

}  // namespace
}  // namespace ngcc
