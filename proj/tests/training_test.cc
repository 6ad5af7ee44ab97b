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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "ngcc/checkpoint.h"
#include "ngcc/error.h"
#include "ngcc/gcc.h"
#include "ngcc/optim.h"

namespace ngcc {
namespace {

std::vector<double> Vec(const Frame& f) {
  return {f.samples().begin(), f.samples().end()};
}

TEST(AdamTest, FirstStepMovesByLearningRateAgainstGradientSign) {
  nn::Parameter p("w", {3});
  p.value = {1.0, -2.0, 0.5};
  p.grad = {0.3, -40.0, 0.0};
  Adam adam({&p});
  adam.Step(0.01);
  EXPECT_NEAR(p.value[0], 1.0 - 0.01, 1e-9);
  EXPECT_NEAR(p.value[1], -2.0 + 0.01, 1e-9);
  EXPECT_DOUBLE_EQ(p.value[2], 0.5);
  EXPECT_EQ(adam.step_count(), 1);
}

TEST(AdamTest, MatchesHandComputedSecondStep) {
  nn::Parameter p("w", {1});
  p.value = {0.0};
  Adam adam({&p});
  p.grad = {1.0};
  adam.Step(0.1);
  p.grad = {-3.0};
  adam.Step(0.1);
  const double m = 0.9 * 0.1 + 0.1 * -3.0;
  const double v = 0.999 * 0.001 + 0.001 * 9.0;
  const double m_hat = m / (1.0 - 0.81);
  const double v_hat = v / (1.0 - 0.999 * 0.999);
  const double first = -0.1 / (1.0 + 1e-8);
  EXPECT_NEAR(p.value[0], first - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8), 1e-12);
}

TEST(AdamTest, NonFiniteGradientLeavesParametersUntouched) {
  nn::Parameter a("a", {2}), b("b", {1});
  a.value = {1.0, 2.0};
  a.grad = {0.5, 0.5};
  b.value = {3.0};
  b.grad = {std::numeric_limits<double>::quiet_NaN()};
  Adam adam({&a, &b});
  try {
    adam.Step(0.1);
    FAIL() << "expected a numeric error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
    EXPECT_NE(std::string(e.what()).find("b[0]"), std::string::npos);
  }
  EXPECT_EQ(a.value, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(adam.step_count(), 0);
}

TEST(CosineLrTest, Endpoints) {
  EXPECT_DOUBLE_EQ(CosineLr(0, 100, 1e-3), 1e-3);
  EXPECT_NEAR(CosineLr(50, 100, 1e-3), 5e-4, 1e-15);
  EXPECT_NEAR(CosineLr(100, 100, 1e-3), 0.0, 1e-15);
  EXPECT_NEAR(CosineLr(25, 100, 2.0), 1.0 + std::cos(std::numbers::pi / 4), 1e-12);
  double previous = 1.0;
  for (int s = 0; s <= 100; ++s) {
    const double lr = CosineLr(s, 100, 1.0);
    EXPECT_LE(lr, previous);
    previous = lr;
  }
  EXPECT_THROW(CosineLr(101, 100, 1.0), Error);
  EXPECT_THROW(CosineLr(0, 0, 1.0), Error);
}

TEST(GeometryTest, BothRoomsGiveMaxLag23) {
  EXPECT_EQ(Geometry::TrainingRoom().max_lag(16000.0), 23);
  EXPECT_EQ(Geometry::EvaluationRoom().max_lag(16000.0), 23);
  EXPECT_NEAR(Distance(Geometry::TrainingRoom().mic1, Geometry::TrainingRoom().mic2), 0.5,
              1e-12);
}

TrainConfig TinyTrainConfig() {
  TrainConfig c = TrainConfig::DeskScale();
  c.model.backbone.sinc_filters = 4;
  c.model.backbone.sinc_kernel = 31;
  c.model.backbone.kernels = {5};
  c.model.backbone.hidden_channels = 4;
  c.model.backbone.channels = 4;
  c.model.classifier.kernels = {5, 3};
  c.model.classifier.hidden_channels = 4;
  c.model.frame_length = 256;
  c.batch_size = 8;
  c.epochs = 3;
  c.seed = 11;
  c.validation_scenes = 8;
  c.synthetic_speakers = 10;
  c.snippets_per_speaker = 4;
  c.snippet_seconds = 0.25;
  return c;
}

TEST(TrainConfigTest, PresetsValidate) {
  EXPECT_NO_THROW(TrainConfig::DeskScale().Validate());
  EXPECT_NO_THROW(TrainConfig::PaperScale().Validate());
  EXPECT_EQ(TrainConfig::DeskScale().epochs, 5);
  EXPECT_EQ(TrainConfig::PaperScale().epochs, 30);
  EXPECT_NO_THROW(TinyTrainConfig().Validate());
}

TEST(TrainConfigTest, RejectsInconsistentSettings) {
  auto expect_config_error = [](const TrainConfig& c) {
    try {
      c.Validate();
      ADD_FAILURE() << "expected a config error";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    }
  };
  TrainConfig c = TinyTrainConfig();
  c.model.max_lag = 20;
  expect_config_error(c);
  c = TinyTrainConfig();
  c.batch_size = 1;
  expect_config_error(c);
  c = TinyTrainConfig();
  c.swap_probability = 1.5;
  expect_config_error(c);
  c = TinyTrainConfig();
  c.snippet_seconds = 0.01;
  expect_config_error(c);
  c = TinyTrainConfig();
  c.geometry.mic2 = {10.0, 2.75, 1.5};
  expect_config_error(c);
}

TEST(SilenceTest, WindowRatioRule) {
  std::vector<double> x(1000, 1.0);
  for (std::size_t i = 0; i < 100; ++i) x[i] = 0.01;
  EXPECT_TRUE(IsSilentWindow(x, 0, 100));
  EXPECT_FALSE(IsSilentWindow(x, 100, 100));
  EXPECT_FALSE(IsSilentWindow(x, 50, 100));
  EXPECT_TRUE(IsSilentWindow(std::vector<double>(64, 0.0), 0, 64));
  EXPECT_THROW(IsSilentWindow(x, 950, 100), Error);
}

TEST(TrainingExampleTest, LabelsMatchGeometryAndSpanBothSigns) {
  const TrainConfig c = TinyTrainConfig();
  const SnippetStore store = MakeSnippetStore(c);
  std::vector<int> histogram(47, 0);
  std::size_t produced = 0;
  for (std::size_t i = 0; i < store.size(Split::kTrain); ++i) {
    auto ex = EpochExample(store, c, 0, i);
    if (!ex) continue;
    ++produced;
    ASSERT_LE(std::abs(ex->label), 23);
    EXPECT_EQ(ex->label, ex->scene.true_delay_samples);
    const double d = (Distance(ex->scene.source, ex->scene.mic1) -
                      Distance(ex->scene.source, ex->scene.mic2)) *
                     c.model.sample_rate / c.geometry.room.speed_of_sound;
    EXPECT_EQ(ex->label, static_cast<int>(std::lround(d)));
    EXPECT_EQ(ex->frames.x1.size(), c.model.frame_length);
    ++histogram[ex->label + 23];
  }
  EXPECT_GE(produced, store.size(Split::kTrain) * 9 / 10);
  int negative = 0, positive = 0;
  for (int m = -23; m <= 23; ++m) {
    if (m < 0) negative += histogram[m + 23];
    if (m > 0) positive += histogram[m + 23];
  }
  EXPECT_GT(negative, 0);
  EXPECT_GT(positive, 0);
}

TEST(TrainingExampleTest, EpochExamplesAreDeterministicAndFreshPerEpoch) {
  const TrainConfig c = TinyTrainConfig();
  const SnippetStore store = MakeSnippetStore(c);
  auto a = EpochExample(store, c, 1, 5);
  auto b = EpochExample(store, c, 1, 5);
  auto other = EpochExample(store, c, 2, 5);
  ASSERT_TRUE(a && b && other);
  EXPECT_EQ(Vec(a->frames.x1), Vec(b->frames.x1));
  EXPECT_EQ(Vec(a->frames.x2), Vec(b->frames.x2));
  EXPECT_EQ(a->label, b->label);
  EXPECT_NE(Vec(a->frames.x1), Vec(other->frames.x1));
}

TEST(TrainingExampleTest, SwapExchangesMicrophonesAndNegatesLabel) {
  const TrainConfig c = TinyTrainConfig();
  const SnippetStore store = MakeSnippetStore(c);
  Rng rng = MakeRng(3, "swap-test");
  const std::vector<double> snippet = store.Get(Split::kTrain, 0);
  auto ex = MakeTrainingExample(snippet, c, rng);
  ASSERT_TRUE(ex);
  TrainingExample swapped = *ex;
  SwapMicrophones(swapped);
  EXPECT_EQ(swapped.label, -ex->label);
  EXPECT_EQ(Vec(swapped.frames.x1), Vec(ex->frames.x2));
  EXPECT_EQ(Vec(swapped.frames.x2), Vec(ex->frames.x1));
  EXPECT_EQ(swapped.scene.true_delay_samples, -ex->scene.true_delay_samples);
}

TEST(TrainingExampleTest, AnechoicExamplesAreRecoveredByGccPhat) {
  TrainConfig c = TinyTrainConfig();
  c.model.frame_length = 2048;
  c.snippet_seconds = 2.0;
  c.anechoic = true;
  c.synthetic_speakers = 20;
  c.snippets_per_speaker = 10;
  const SnippetStore store = MakeSnippetStore(c);
  std::size_t n = 0, within_one = 0, exact = 0;
  for (std::size_t i = 0; i < store.size(Split::kTrain); ++i) {
    auto ex = EpochExample(store, c, 0, i);
    if (!ex) continue;
    EXPECT_TRUE(ex->scene.room.anechoic());
    const int est = EstimateDelay(Gcc(ex->frames.x1, ex->frames.x2, Weighting::Phat(), 23));
    ++n;
    if (std::abs(est - ex->label) <= 1) ++within_one;
    if (est == ex->label) ++exact;
  }
  ASSERT_GT(n, 100u);
  EXPECT_EQ(within_one, n);
  EXPECT_GE(static_cast<double>(exact) / n, 0.95);
}

class TrainTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("ngcc_train_test_" + std::to_string(::testing::UnitTest::GetInstance()
                                                    ->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  static std::vector<std::vector<double>> Weights(NgccModel& model) {
    std::vector<std::vector<double>> out;
    for (auto* p : model.parameters()) out.push_back(p->value);
    for (auto* b : model.buffers()) out.push_back(b->value);
    return out;
  }

  std::filesystem::path dir_;
};

TEST_F(TrainTest, RunsAreDeterministic) {
  const TrainConfig c = TinyTrainConfig();
  const SnippetStore store = MakeSnippetStore(c);
  NgccModel a(c.model, c.seed), b(c.model, c.seed);
  const TrainResult ra = Train(a, c, store);
  const TrainResult rb = Train(b, c, store);
  ASSERT_EQ(ra.log.size(), 3u);
  EXPECT_EQ(Weights(a), Weights(b));
  for (std::size_t e = 0; e < ra.log.size(); ++e) {
    EXPECT_EQ(ra.log[e].train_ce, rb.log[e].train_ce);
    EXPECT_EQ(ra.log[e].val_acc, rb.log[e].val_acc);
    EXPECT_TRUE(std::isfinite(ra.log[e].train_ce));
    EXPECT_GE(ra.log[e].val_acc, 0.0);
    EXPECT_LE(ra.log[e].val_acc, 1.0);
  }
  EXPECT_DOUBLE_EQ(ra.log[0].lr, c.learning_rate);
  EXPECT_LT(ra.log[2].lr, ra.log[1].lr);
}

TEST_F(TrainTest, KeepsBestValidationWeightsAndWritesLog) {
  const TrainConfig c = TinyTrainConfig();
  const SnippetStore store = MakeSnippetStore(c);
  NgccModel model(c.model, c.seed);
  TrainOptions options;
  options.checkpoint_prefix = Path("best");
  options.log_path = Path("log.csv");
  int calls = 0;
  options.on_epoch = [&](const EpochLog&) { ++calls; };
  const TrainResult r = Train(model, c, store, options);
  EXPECT_EQ(calls, 3);
  double best = -1.0;
  for (const auto& e : r.log) best = std::max(best, e.val_acc);
  EXPECT_EQ(r.best_val_acc, best);

  const auto saved = LoadCheckpoint(options.checkpoint_prefix);
  const auto mine = Weights(model);
  const auto theirs = Weights(*saved);
  ASSERT_EQ(mine.size(), theirs.size());
  for (std::size_t k = 0; k < mine.size(); ++k) {
    for (std::size_t i = 0; i < mine[k].size(); ++i) {
      EXPECT_EQ(static_cast<float>(mine[k][i]), static_cast<float>(theirs[k][i]));
    }
  }

  std::ifstream in(options.log_path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "epoch,lr,train_ce,train_loss,val_acc,skipped");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST_F(TrainTest, ResumeMatchesUninterruptedRun) {
  const TrainConfig c = TinyTrainConfig();
  const SnippetStore store = MakeSnippetStore(c);
  NgccModel full(c.model, c.seed);
  TrainOptions full_options;
  full_options.checkpoint_prefix = Path("full");
  const TrainResult rf = Train(full, c, store, full_options);

  NgccModel part(c.model, c.seed);
  TrainOptions options;
  options.checkpoint_prefix = Path("part");
  options.state_path = Path("state.bin");
  options.log_path = Path("part.csv");
  options.stop_after_epoch = 1;
  Train(part, c, store, options);

  NgccModel resumed(c.model, 999);
  options.stop_after_epoch.reset();
  options.resume = true;
  const TrainResult rr = Train(resumed, c, store, options);

  ASSERT_EQ(rr.log.size(), rf.log.size());
  for (std::size_t e = 0; e < rf.log.size(); ++e) {
    EXPECT_EQ(rr.log[e].train_ce, rf.log[e].train_ce);
    EXPECT_EQ(rr.log[e].val_acc, rf.log[e].val_acc);
  }
  EXPECT_EQ(rr.best_epoch, rf.best_epoch);
  EXPECT_EQ(Weights(resumed), Weights(full));
}

TEST_F(TrainTest, RejectsModelThatDoesNotMatchConfig) {
  const TrainConfig c = TinyTrainConfig();
  const SnippetStore store = MakeSnippetStore(c);
  ModelConfig other = c.model;
  other.classifier.hidden_channels = 5;
  NgccModel model(other, 0);
  EXPECT_THROW(Train(model, c, store), Error);
  TrainOptions options;
  options.resume = true;
  NgccModel ok(c.model, 0);
  EXPECT_THROW(Train(ok, c, store, options), Error);
}

}  // namespace
}  // namespace ngcc
