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

#ifndef NGCC_MODEL_H_
#define NGCC_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ngcc/nn/layers.h"
#include "ngcc/nn/tensor.h"
#include "ngcc/room.h"
#include "ngcc/signal.h"

namespace ngcc {

enum class Head { kCrossEntropy, kMseSoftArgmax };

std::string HeadName(Head head);
Head ParseHead(const std::string& name);

// Filter network applied to each microphone signal: a band-pass filter bank
// (or a plain convolution when use_sinc is false) followed by convolutions
// of the given kernel lengths. Every layer is circularly padded and followed
// by batchnorm and a leaky rectifier. The last convolution has `channels`
// outputs, the others `hidden_channels`.
struct BackboneConfig {
  bool use_sinc = true;
  int sinc_filters = 128;
  int sinc_kernel = 1023;
  std::vector<int> kernels = {11, 9, 7};
  int hidden_channels = 128;
  int channels = 128;
};

// Lag classifier over the correlation matrix. The last layer has a single
// output channel holding one logit per lag.
struct ClassifierConfig {
  std::vector<int> kernels = {11, 9, 7, 5};
  int hidden_channels = 128;
  Head head = Head::kCrossEntropy;
};

struct ModelConfig {
  BackboneConfig backbone;
  ClassifierConfig classifier;
  std::size_t frame_length = 2048;
  double sample_rate = 16000.0;
  int max_lag = 23;
  double leaky_slope = 0.01;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;

  int num_lags() const { return 2 * max_lag + 1; }
  void Validate() const;
  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json& j);

  // 128 sinc filters of length 1023, 128 channels throughout.
  static ModelConfig PaperScale();
  // 32 sinc filters of length 255, 16 channels.
  static ModelConfig DeskScale();
};

// GCC-PHAT of every filtered channel; rows are lags -max_lag..max_lag.
struct CorrelationMatrix {
  int max_lag = 0;
  std::size_t channels = 0;
  std::vector<double> values;  // values[(lag + max_lag) * channels + l]

  double at(int lag, std::size_t l) const {
    return values[(lag + max_lag) * channels + l];
  }
  std::vector<double> column(std::size_t l) const;
};

struct DelayPosterior {
  int max_lag = 0;
  std::vector<double> probabilities;

  double at(int lag) const { return probabilities[lag + max_lag]; }
  // Argmax with the GCC tie rule.
  int Argmax() const;
};

struct LossResult {
  double loss = 0.0;
  nn::Tensor grad_logits;
};

// -log p[true_delay].
double CeLoss(const DelayPosterior& posterior, int true_delay);
// Mean cross entropy of softmax(logits) over the batch; logits (B, 1, lags).
LossResult CrossEntropyFromLogits(const nn::Tensor& logits,
                                  std::span<const int> labels, int max_lag);

// sum_m m * softmax(logits)[m].
double SoftArgmax(std::span<const double> logits, int max_lag);
double MseLoss(double estimate, int true_delay);
// Mean squared error of the soft-argmax estimate over the batch.
LossResult MseFromLogits(const nn::Tensor& logits, std::span<const int> labels,
                         int max_lag);

// Zero mean, unit peak absolute value. All-zero input stays zero.
std::vector<double> NormalizeFrame(std::span<const double> x);

// Differentiable per-channel GCC-PHAT. Input rows [0, B) hold the first
// microphone and [B, 2B) the second; output is (B, channels, 2*max_lag+1).
class MultichannelGccPhat {
 public:
  explicit MultichannelGccPhat(int max_lag) : max_lag_(max_lag) {}

  nn::Tensor Forward(const nn::Tensor& y);
  nn::Tensor Backward(const nn::Tensor& grad_out);

 private:
  int max_lag_;
  struct Record {
    nn::Shape input_shape;
    std::vector<std::vector<Complex>> spec1, spec2, phase;
    std::vector<std::vector<double>> inv_mag;
  };
  std::optional<Record> record_;
};

class NgccModel {
 public:
  NgccModel(const ModelConfig& config, std::uint64_t init_seed);

  const ModelConfig& config() const { return config_; }

  // Backbone output for one frame, shape (1, channels, N).
  nn::Tensor FilterSignals(const Frame& x, nn::Mode mode = nn::Mode::kEval);
  // Column l is the PHAT correlation of y1[l] and y2[l]; inputs (1, L, N).
  CorrelationMatrix CorrelateChannels(const nn::Tensor& y1, const nn::Tensor& y2);
  DelayPosterior Classify(const CorrelationMatrix& r);
  double MseHead(const CorrelationMatrix& r);

  // Batched pipeline. Correlations returns (B, L, lags); Forward returns
  // logits (B, 1, lags) and records the graph for Backward.
  nn::Tensor Correlations(std::span<const FramePair> batch, nn::Mode mode);
  nn::Tensor Forward(std::span<const FramePair> batch, nn::Mode mode);
  void Backward(const nn::Tensor& grad_logits);
  // Forward + head loss + Backward; returns the mean loss.
  double TrainStep(std::span<const FramePair> batch, std::span<const int> labels);
  LossResult Loss(const nn::Tensor& logits, std::span<const int> labels) const;

  struct Prediction {
    int delay = 0;
    DelayPosterior posterior;
    double soft_estimate = 0.0;
  };
  // CE head: argmax of the posterior. MSE head: rounded soft-argmax.
  Prediction Predict(const Frame& x1, const Frame& x2);
  std::vector<Prediction> PredictBatch(std::span<const FramePair> batch);
  Prediction PredictionFromLogits(std::span<const double> logits) const;

  std::vector<nn::Parameter*> parameters();
  std::vector<nn::Parameter*> buffers();
  std::size_t ParameterCount();
  void ZeroGrad();
  nlohmann::json Describe() const;

  nn::Sequential& backbone() { return backbone_; }
  nn::Sequential& classifier() { return classifier_; }

 private:
  nn::Tensor StackInputs(std::span<const FramePair> batch) const;

  ModelConfig config_;
  nn::Sequential backbone_;
  nn::Sequential classifier_;
  MultichannelGccPhat gcc_;
};

}  // namespace ngcc

#endif  // NGCC_MODEL_H_
