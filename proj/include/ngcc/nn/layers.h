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

#ifndef NGCC_NN_LAYERS_H_
#define NGCC_NN_LAYERS_H_

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ngcc/nn/tensor.h"
#include "ngcc/rng.h"

namespace ngcc::nn {

// A differentiable layer. Forward records what Backward needs; Backward
// consumes that record, accumulates parameter gradients and returns the
// gradient with respect to the input. Backward without a recorded forward
// pass throws kMissingGraph.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  virtual Tensor Forward(const Tensor& x, Mode mode) = 0;
  virtual Tensor Backward(const Tensor& grad_out) = 0;
  virtual std::vector<Parameter*> parameters() { return {}; }
  // Non-trainable state saved with checkpoints (batchnorm running stats).
  virtual std::vector<Parameter*> buffers() { return {}; }
  virtual nlohmann::json Describe() const = 0;

  // The first layer of a network can skip the input gradient.
  void set_needs_input_grad(bool needs) { needs_input_grad_ = needs; }
  bool needs_input_grad() const { return needs_input_grad_; }

 protected:
  void RequireGraph(bool recorded) const;

  bool needs_input_grad_ = true;
};

enum class Padding { kCircular, kZero };

// 1-D convolution (cross-correlation, odd kernel) with "same" output length.
// Circular padding makes it exactly equivariant to circular time shifts.
class Conv1d : public Layer {
 public:
  Conv1d(std::string name, int in_channels, int out_channels, int kernel_length,
         Padding padding);

  std::string kind() const override { return "conv1d"; }
  Tensor Forward(const Tensor& x, Mode mode) override;
  Tensor Backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
  nlohmann::json Describe() const override;

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and bias.
  void Initialize(Rng& rng);

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel_length() const { return kernel_; }
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  int in_, out_, kernel_;
  Padding padding_;
  Parameter weight_;  // (out, in, kernel)
  Parameter bias_;    // (out)
  std::optional<Tensor> padded_input_;
};

// Band-pass filter bank with learnable cutoffs. Each filter is a
// Hamming-windowed difference of two ideal low-pass sincs, even-symmetric so
// it adds no delay. Filtering is circular.
class SincConv1d : public Layer {
 public:
  static constexpr double kMinCutoffHz = 1.0;
  static constexpr double kMinBandHz = 1.0;

  SincConv1d(std::string name, int num_filters, int kernel_length,
             double sample_rate);

  std::string kind() const override { return "sinc"; }
  Tensor Forward(const Tensor& x, Mode mode) override;
  Tensor Backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&low_hz_, &band_hz_}; }
  nlohmann::json Describe() const override;

  // Mel-spaced bands covering 30 Hz .. fs/2 - 100 Hz.
  void InitializeMel();
  void SetBand(int filter, double low_hz, double band_hz);

  // Effective (low, high) cutoffs after absolute value and clamping.
  std::pair<double, double> Cutoffs(int filter) const;
  // Taps at offsets -(K-1)/2 .. (K-1)/2.
  std::vector<double> Kernel(int filter) const;

  int num_filters() const { return filters_; }
  int kernel_length() const { return kernel_; }
  // Number of times synthesis had to clamp a cutoff.
  long sanitized_count() const { return sanitized_; }

 private:
  struct Band {
    double low, high;
    double dlow_dlow, dhigh_dlow, dhigh_dband;
  };
  Band Resolve(int filter) const;

  int filters_, kernel_;
  double sample_rate_;
  Parameter low_hz_;
  Parameter band_hz_;
  std::vector<double> window_;
  mutable long sanitized_ = 0;
  mutable bool warned_ = false;

  struct Record {
    Shape input_shape;
    std::vector<std::vector<std::complex<double>>> input_spectra;   // per item
    std::vector<std::vector<std::complex<double>>> kernel_spectra;  // per filter
    std::vector<Band> bands;
  };
  std::optional<Record> record_;
};

class BatchNorm1d : public Layer {
 public:
  BatchNorm1d(std::string name, int channels, double momentum, double epsilon);

  std::string kind() const override { return "batchnorm"; }
  Tensor Forward(const Tensor& x, Mode mode) override;
  Tensor Backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&scale_, &offset_}; }
  std::vector<Parameter*> buffers() override {
    return {&running_mean_, &running_var_};
  }
  nlohmann::json Describe() const override;

  Parameter& scale() { return scale_; }
  Parameter& offset() { return offset_; }
  Parameter& running_mean() { return running_mean_; }
  Parameter& running_var() { return running_var_; }

 private:
  int channels_;
  double momentum_, epsilon_;
  Parameter scale_, offset_, running_mean_, running_var_;

  struct Record {
    Mode mode;
    Tensor normalized;
    std::vector<double> inv_std;
  };
  std::optional<Record> record_;
};

class LeakyRelu : public Layer {
 public:
  explicit LeakyRelu(double negative_slope) : slope_(negative_slope) {}

  std::string kind() const override { return "leaky_relu"; }
  Tensor Forward(const Tensor& x, Mode mode) override;
  Tensor Backward(const Tensor& grad_out) override;
  nlohmann::json Describe() const override;

 private:
  double slope_;
  std::optional<Tensor> input_;
};

// Layers applied in order.
class Sequential {
 public:
  void Add(std::unique_ptr<Layer> layer);

  Tensor Forward(const Tensor& x, Mode mode);
  Tensor Backward(const Tensor& grad_out);

  std::vector<Parameter*> parameters();
  std::vector<Parameter*> buffers();
  nlohmann::json Describe() const;
  void ZeroGrad();

  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  bool recorded_ = false;
};

// Softmax along the length axis of every (batch, channel) row.
Tensor Softmax(const Tensor& logits);
std::vector<double> Softmax(std::span<const double> logits);

}  // namespace ngcc::nn

#endif  // NGCC_NN_LAYERS_H_
