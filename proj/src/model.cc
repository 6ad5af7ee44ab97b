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

#include "ngcc/model.h"

#include <algorithm>
#include <cmath>

#include "ngcc/error.h"
#include "ngcc/gcc.h"
#include "ngcc/parallel.h"

namespace ngcc {

using nn::Mode;
using nn::Shape;
using nn::Tensor;

std::string HeadName(Head head) {
  return head == Head::kCrossEntropy ? "ce" : "mse";
}

Head ParseHead(const std::string& name) {
  if (name == "ce") return Head::kCrossEntropy;
  if (name == "mse") return Head::kMseSoftArgmax;
  throw Error(ErrorKind::kConfig, "unknown head '" + name + "' (expected ce or mse)");
}

void ModelConfig::Validate() const {
  auto odd = [](int k) { return k > 0 && k % 2 == 1; };
  Require(IsPowerOfTwo(frame_length), ErrorKind::kConfig,
          "frame_length must be a power of two");
  Require(sample_rate > 0.0, ErrorKind::kConfig, "sample_rate must be positive");
  Require(max_lag >= 0 && 2 * static_cast<std::size_t>(max_lag) < frame_length,
          ErrorKind::kConfig, "max_lag must be below frame_length / 2");
  Require(backbone.sinc_filters >= 1 && odd(backbone.sinc_kernel) &&
              static_cast<std::size_t>(backbone.sinc_kernel) <= frame_length,
          ErrorKind::kConfig, "sinc layer needs >= 1 filter and an odd kernel <= N");
  Require(!backbone.kernels.empty() &&
              std::all_of(backbone.kernels.begin(), backbone.kernels.end(), odd),
          ErrorKind::kConfig, "backbone kernel lengths must be odd");
  Require(backbone.channels >= 1 && backbone.hidden_channels >= 1,
          ErrorKind::kConfig, "backbone channel counts must be >= 1");
  Require(!classifier.kernels.empty() &&
              std::all_of(classifier.kernels.begin(), classifier.kernels.end(), odd),
          ErrorKind::kConfig, "classifier kernel lengths must be odd");
  Require(classifier.hidden_channels >= 1, ErrorKind::kConfig,
          "classifier channels must be >= 1");
  Require(bn_epsilon > 0.0 && bn_momentum >= 0.0 && bn_momentum <= 1.0,
          ErrorKind::kConfig, "invalid batchnorm hyperparameters");
}

nlohmann::json ModelConfig::ToJson() const {
  return {{"use_sinc", backbone.use_sinc},
          {"sinc_filters", backbone.sinc_filters},
          {"sinc_kernel", backbone.sinc_kernel},
          {"backbone_kernels", backbone.kernels},
          {"backbone_hidden_channels", backbone.hidden_channels},
          {"channels", backbone.channels},
          {"classifier_kernels", classifier.kernels},
          {"classifier_channels", classifier.hidden_channels},
          {"head", HeadName(classifier.head)},
          {"frame_length", frame_length},
          {"sample_rate", sample_rate},
          {"max_lag", max_lag},
          {"leaky_slope", leaky_slope},
          {"bn_momentum", bn_momentum},
          {"bn_epsilon", bn_epsilon}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.backbone.use_sinc = j.at("use_sinc").get<bool>();
    c.backbone.sinc_filters = j.at("sinc_filters").get<int>();
    c.backbone.sinc_kernel = j.at("sinc_kernel").get<int>();
    c.backbone.kernels = j.at("backbone_kernels").get<std::vector<int>>();
    c.backbone.hidden_channels = j.at("backbone_hidden_channels").get<int>();
    c.backbone.channels = j.at("channels").get<int>();
    c.classifier.kernels = j.at("classifier_kernels").get<std::vector<int>>();
    c.classifier.hidden_channels = j.at("classifier_channels").get<int>();
    c.classifier.head = ParseHead(j.at("head").get<std::string>());
    c.frame_length = j.at("frame_length").get<std::size_t>();
    c.sample_rate = j.at("sample_rate").get<double>();
    c.max_lag = j.at("max_lag").get<int>();
    c.leaky_slope = j.at("leaky_slope").get<double>();
    c.bn_momentum = j.at("bn_momentum").get<double>();
    c.bn_epsilon = j.at("bn_epsilon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("bad model config: ") + e.what());
  }
  c.Validate();
  return c;
}

ModelConfig ModelConfig::PaperScale() { return ModelConfig{}; }

ModelConfig ModelConfig::DeskScale() {
  ModelConfig c;
  c.backbone.sinc_filters = 32;
  c.backbone.sinc_kernel = 255;
  c.backbone.hidden_channels = 16;
  c.backbone.channels = 16;
  c.classifier.hidden_channels = 16;
  return c;
}

std::vector<double> CorrelationMatrix::column(std::size_t l) const {
  std::vector<double> out(2 * max_lag + 1);
  for (int m = -max_lag; m <= max_lag; ++m) out[m + max_lag] = at(m, l);
  return out;
}

int DelayPosterior::Argmax() const { return ArgmaxLag(probabilities, max_lag); }

double CeLoss(const DelayPosterior& posterior, int true_delay) {
  Require(std::abs(true_delay) <= posterior.max_lag, ErrorKind::kInvalidLabel,
          "label " + std::to_string(true_delay) + " outside +/-" +
              std::to_string(posterior.max_lag));
  return -std::log(posterior.at(true_delay));
}

namespace {

void CheckLogits(const Tensor& logits, std::span<const int> labels, int max_lag) {
  const Shape s = logits.shape();
  Require(s.channels == 1 && s.length == static_cast<std::size_t>(2 * max_lag + 1),
          ErrorKind::kShape, "logits must be (B, 1, 2*max_lag+1), got " + s.ToString());
  Require(labels.size() == s.batch, ErrorKind::kShape,
          "label count does not match batch");
  for (int t : labels) {
    Require(std::abs(t) <= max_lag, ErrorKind::kInvalidLabel,
            "label " + std::to_string(t) + " outside +/-" + std::to_string(max_lag));
  }
}

}  // namespace

LossResult CrossEntropyFromLogits(const Tensor& logits, std::span<const int> labels,
                                  int max_lag) {
  CheckLogits(logits, labels, max_lag);
  const std::size_t batch = logits.shape().batch;
  LossResult out{0.0, Tensor(logits.shape())};
  for (std::size_t b = 0; b < batch; ++b) {
    auto row = logits.row(b, 0);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - peak);
    const double log_z = peak + std::log(total);
    const std::size_t target = static_cast<std::size_t>(labels[b] + max_lag);
    out.loss += log_z - row[target];
    auto grad = out.grad_logits.row(b, 0);
    for (std::size_t m = 0; m < row.size(); ++m) {
      grad[m] = (std::exp(row[m] - log_z) - (m == target ? 1.0 : 0.0)) /
                static_cast<double>(batch);
    }
  }
  out.loss /= static_cast<double>(batch);
  return out;
}

double SoftArgmax(std::span<const double> logits, int max_lag) {
  std::vector<double> p = nn::Softmax(logits);
  double e = 0.0;
  for (int m = -max_lag; m <= max_lag; ++m) e += m * p[m + max_lag];
  return e;
}

double MseLoss(double estimate, int true_delay) {
  const double d = estimate - static_cast<double>(true_delay);
  return d * d;
}

LossResult MseFromLogits(const Tensor& logits, std::span<const int> labels,
                         int max_lag) {
  CheckLogits(logits, labels, max_lag);
  const std::size_t batch = logits.shape().batch;
  LossResult out{0.0, Tensor(logits.shape())};
  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<double> p = nn::Softmax(logits.row(b, 0));
    double est = 0.0;
    for (int m = -max_lag; m <= max_lag; ++m) est += m * p[m + max_lag];
    const double err = est - labels[b];
    out.loss += err * err;
    auto grad = out.grad_logits.row(b, 0);
    // d est / d logit_j = p_j (m_j - est)
    for (int m = -max_lag; m <= max_lag; ++m) {
      grad[m + max_lag] = 2.0 * err * p[m + max_lag] * (m - est) /
                          static_cast<double>(batch);
    }
  }
  out.loss /= static_cast<double>(batch);
  return out;
}

std::vector<double> NormalizeFrame(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  if (out.empty()) return out;
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  double peak = 0.0;
  for (double& v : out) {
    v -= mean;
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 0.0) {
    for (double& v : out) v /= peak;
  }
  return out;
}

Tensor MultichannelGccPhat::Forward(const Tensor& y) {
  const Shape s = y.shape();
  Require(s.batch % 2 == 0 && s.batch > 0, ErrorKind::kShape,
          "multichannel GCC expects paired rows, got " + s.ToString());
  const std::size_t n = s.length;
  Require(IsPowerOfTwo(n), ErrorKind::kInvalidLength,
          "signal length must be a power of two");
  Require(max_lag_ >= 0 && 2 * static_cast<std::size_t>(max_lag_) < n,
          ErrorKind::kInvalidArgument, "max_lag must be below N/2");
  const std::size_t pairs = s.batch / 2;
  const std::size_t rows = pairs * s.channels;
  const std::size_t lags = static_cast<std::size_t>(2 * max_lag_ + 1);
  Record rec;
  rec.input_shape = s;
  rec.spec1.resize(rows);
  rec.spec2.resize(rows);
  rec.phase.resize(rows);
  rec.inv_mag.resize(rows);
  Tensor out({pairs, s.channels, lags});
  ParallelFor(rows, [&](std::size_t r) {
    const std::size_t b = r / s.channels, l = r % s.channels;
    auto a = y.row(b, l);
    auto c = y.row(pairs + b, l);
    // Both real rows through one complex transform.
    std::vector<Complex> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = Complex(a[i], c[i]);
    Fft(z);
    std::vector<Complex> s1(n), s2(n), phase(n);
    std::vector<double> inv(n, 0.0);
    double max_mag = 0.0;
    std::vector<double> mag(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Complex zk = z[k];
      const Complex zr = std::conj(z[(n - k) % n]);
      s1[k] = 0.5 * (zk + zr);
      s2[k] = Complex(0.0, -0.5) * (zk - zr);
      phase[k] = s1[k] * std::conj(s2[k]);
      mag[k] = std::abs(phase[k]);
      max_mag = std::max(max_mag, mag[k]);
    }
    const double floor = kPhatGuard * max_mag;
    for (std::size_t k = 0; k < n; ++k) {
      if (mag[k] > floor && mag[k] > 0.0) {
        inv[k] = 1.0 / mag[k];
        phase[k] *= inv[k];
      } else {
        phase[k] = 0.0;
      }
    }
    std::vector<Complex> corr = phase;
    InverseFftUnnormalized(corr);
    auto dst = out.row(b, l);
    const double scale = 1.0 / static_cast<double>(n);
    for (int m = -max_lag_; m <= max_lag_; ++m) {
      const std::size_t idx = m < 0 ? n - static_cast<std::size_t>(-m)
                                    : static_cast<std::size_t>(m);
      dst[m + max_lag_] = corr[idx].real() * scale;
    }
    rec.spec1[r] = std::move(s1);
    rec.spec2[r] = std::move(s2);
    rec.phase[r] = std::move(phase);
    rec.inv_mag[r] = std::move(inv);
  });
  record_ = std::move(rec);
  return out;
}

Tensor MultichannelGccPhat::Backward(const Tensor& grad_out) {
  Require(record_.has_value(), ErrorKind::kMissingGraph,
          "gcc-phat: backward called without a recorded forward pass");
  Record rec = std::move(*record_);
  record_.reset();
  const Shape s = rec.input_shape;
  const std::size_t n = s.length;
  const std::size_t pairs = s.batch / 2;
  const std::size_t lags = static_cast<std::size_t>(2 * max_lag_ + 1);
  Require(grad_out.shape() == Shape{pairs, s.channels, lags}, ErrorKind::kShape,
          "gcc-phat gradient shape mismatch");
  Tensor grad_in(s);
  ParallelFor(pairs * s.channels, [&](std::size_t r) {
    const std::size_t b = r / s.channels, l = r % s.channels;
    auto g = grad_out.row(b, l);
    // dL/dP = FFT(g placed at wrapped lag indices) / N.
    std::vector<Complex> gp(n, Complex(0.0, 0.0));
    for (int m = -max_lag_; m <= max_lag_; ++m) {
      const std::size_t idx = m < 0 ? n - static_cast<std::size_t>(-m)
                                    : static_cast<std::size_t>(m);
      gp[idx] = g[m + max_lag_];
    }
    Fft(gp);
    const double scale = 1.0 / static_cast<double>(n);
    const auto& phase = rec.phase[r];
    const auto& inv = rec.inv_mag[r];
    const auto& s1 = rec.spec1[r];
    const auto& s2 = rec.spec2[r];
    std::vector<Complex> ga(n), gb(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (inv[k] == 0.0) {
        ga[k] = gb[k] = 0.0;
        continue;
      }
      const Complex gpk = gp[k] * scale;
      // Through P = C / |C|: remove the radial component, divide by |C|.
      const double radial = gpk.real() * phase[k].real() + gpk.imag() * phase[k].imag();
      const Complex gc = (gpk - radial * phase[k]) * inv[k];
      // C = A conj(B).
      ga[k] = gc * s2[k];
      gb[k] = std::conj(gc) * s1[k];
    }
    // Real parts of both inverse transforms from one complex inverse: make
    // each spectrum Hermitian, then pack the second as the imaginary part.
    std::vector<Complex> z(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t kr = (n - k) % n;
      const Complex ha = 0.5 * (ga[k] + std::conj(ga[kr]));
      const Complex hb = 0.5 * (gb[k] + std::conj(gb[kr]));
      z[k] = ha + Complex(0.0, 1.0) * hb;
    }
    InverseFftUnnormalized(z);
    auto da = grad_in.row(b, l);
    auto db = grad_in.row(pairs + b, l);
    for (std::size_t i = 0; i < n; ++i) {
      da[i] = z[i].real();
      db[i] = z[i].imag();
    }
  });
  return grad_in;
}

NgccModel::NgccModel(const ModelConfig& config, std::uint64_t init_seed)
    : config_(config), gcc_(config.max_lag) {
  config_.Validate();
  Rng rng = MakeRng(init_seed, "init");
  const auto& bb = config_.backbone;
  const double slope = config_.leaky_slope;
  auto add_norm_act = [&](nn::Sequential& net, const std::string& name, int ch) {
    net.Add(std::make_unique<nn::BatchNorm1d>(name, ch, config_.bn_momentum,
                                              config_.bn_epsilon));
    net.Add(std::make_unique<nn::LeakyRelu>(slope));
  };

  int ch = bb.sinc_filters;
  if (bb.use_sinc) {
    backbone_.Add(std::make_unique<nn::SincConv1d>("backbone.0", bb.sinc_filters,
                                                   bb.sinc_kernel, config_.sample_rate));
  } else {
    auto conv = std::make_unique<nn::Conv1d>("backbone.0", 1, bb.sinc_filters,
                                             bb.sinc_kernel, nn::Padding::kCircular);
    conv->Initialize(rng);
    backbone_.Add(std::move(conv));
  }
  backbone_.layer(0).set_needs_input_grad(false);
  add_norm_act(backbone_, "backbone.0.bn", ch);
  for (std::size_t i = 0; i < bb.kernels.size(); ++i) {
    const bool last = i + 1 == bb.kernels.size();
    const int out = last ? bb.channels : bb.hidden_channels;
    const std::string name = "backbone." + std::to_string(i + 1);
    auto conv = std::make_unique<nn::Conv1d>(name, ch, out, bb.kernels[i],
                                             nn::Padding::kCircular);
    conv->Initialize(rng);
    backbone_.Add(std::move(conv));
    add_norm_act(backbone_, name + ".bn", out);
    ch = out;
  }

  // The lag axis is not periodic, so the classifier zero-pads.
  const auto& cl = config_.classifier;
  ch = bb.channels;
  for (std::size_t i = 0; i < cl.kernels.size(); ++i) {
    const bool last = i + 1 == cl.kernels.size();
    const int out = last ? 1 : cl.hidden_channels;
    const std::string name = "classifier." + std::to_string(i);
    auto conv = std::make_unique<nn::Conv1d>(name, ch, out, cl.kernels[i],
                                             nn::Padding::kZero);
    conv->Initialize(rng);
    classifier_.Add(std::move(conv));
    if (!last) add_norm_act(classifier_, name + ".bn", out);
    ch = out;
  }
}

Tensor NgccModel::StackInputs(std::span<const FramePair> batch) const {
  Require(!batch.empty(), ErrorKind::kShape, "empty batch");
  const std::size_t n = config_.frame_length;
  const std::size_t b = batch.size();
  Tensor x({2 * b, 1, n});
  for (std::size_t i = 0; i < b; ++i) {
    Require(batch[i].x1.size() == n && batch[i].x2.size() == n, ErrorKind::kShape,
            "frame length does not match the model (" + std::to_string(n) + ")");
    auto a = NormalizeFrame(batch[i].x1.samples());
    auto c = NormalizeFrame(batch[i].x2.samples());
    std::copy(a.begin(), a.end(), x.row(i, 0).begin());
    std::copy(c.begin(), c.end(), x.row(b + i, 0).begin());
  }
  return x;
}

Tensor NgccModel::FilterSignals(const Frame& x, Mode mode) {
  Require(x.size() == config_.frame_length, ErrorKind::kShape,
          "frame length does not match the model");
  auto normalized = NormalizeFrame(x.samples());
  Tensor in({1, 1, x.size()}, std::move(normalized));
  return backbone_.Forward(in, mode);
}

CorrelationMatrix NgccModel::CorrelateChannels(const Tensor& y1, const Tensor& y2) {
  Require(y1.shape() == y2.shape() && y1.shape().batch == 1, ErrorKind::kShape,
          "filtered signals must have equal (1, L, N) shapes");
  const Shape s = y1.shape();
  Tensor stacked({2, s.channels, s.length});
  std::copy(y1.values().begin(), y1.values().end(), stacked.values().begin());
  std::copy(y2.values().begin(), y2.values().end(),
            stacked.values().begin() + static_cast<std::ptrdiff_t>(y1.size()));
  MultichannelGccPhat gcc(config_.max_lag);
  Tensor r = gcc.Forward(stacked);
  CorrelationMatrix out;
  out.max_lag = config_.max_lag;
  out.channels = s.channels;
  out.values.resize(r.size());
  for (std::size_t l = 0; l < s.channels; ++l) {
    auto row = r.row(0, l);
    for (std::size_t m = 0; m < row.size(); ++m) out.values[m * s.channels + l] = row[m];
  }
  return out;
}

DelayPosterior NgccModel::Classify(const CorrelationMatrix& r) {
  Require(r.max_lag == config_.max_lag &&
              r.channels == static_cast<std::size_t>(config_.backbone.channels),
          ErrorKind::kShape, "correlation matrix does not match the model");
  const std::size_t lags = static_cast<std::size_t>(config_.num_lags());
  Tensor in({1, r.channels, lags});
  for (std::size_t l = 0; l < r.channels; ++l) {
    for (std::size_t m = 0; m < lags; ++m) in.at(0, l, m) = r.values[m * r.channels + l];
  }
  Tensor logits = classifier_.Forward(in, Mode::kEval);
  return {config_.max_lag, nn::Softmax(logits.row(0, 0))};
}

double NgccModel::MseHead(const CorrelationMatrix& r) {
  DelayPosterior p = Classify(r);
  double e = 0.0;
  for (int m = -p.max_lag; m <= p.max_lag; ++m) e += m * p.at(m);
  return e;
}

Tensor NgccModel::Correlations(std::span<const FramePair> batch, Mode mode) {
  Tensor y = backbone_.Forward(StackInputs(batch), mode);
  return gcc_.Forward(y);
}

Tensor NgccModel::Forward(std::span<const FramePair> batch, Mode mode) {
  Tensor r = Correlations(batch, mode);
  return classifier_.Forward(r, mode);
}

void NgccModel::Backward(const Tensor& grad_logits) {
  Tensor g = classifier_.Backward(grad_logits);
  g = gcc_.Backward(g);
  backbone_.Backward(g);
}

LossResult NgccModel::Loss(const Tensor& logits, std::span<const int> labels) const {
  return config_.classifier.head == Head::kCrossEntropy
             ? CrossEntropyFromLogits(logits, labels, config_.max_lag)
             : MseFromLogits(logits, labels, config_.max_lag);
}

double NgccModel::TrainStep(std::span<const FramePair> batch,
                            std::span<const int> labels) {
  Tensor logits = Forward(batch, Mode::kTrain);
  LossResult loss = Loss(logits, labels);
  Backward(loss.grad_logits);
  return loss.loss;
}

NgccModel::Prediction NgccModel::PredictionFromLogits(std::span<const double> logits) const {
  Prediction p;
  p.posterior = {config_.max_lag, nn::Softmax(logits)};
  for (int m = -config_.max_lag; m <= config_.max_lag; ++m) {
    p.soft_estimate += m * p.posterior.at(m);
  }
  if (config_.classifier.head == Head::kCrossEntropy) {
    p.delay = p.posterior.Argmax();
  } else {
    p.delay = std::clamp(static_cast<int>(std::lround(p.soft_estimate)),
                         -config_.max_lag, config_.max_lag);
  }
  return p;
}

NgccModel::Prediction NgccModel::Predict(const Frame& x1, const Frame& x2) {
  FramePair pair{x1, x2};
  return PredictBatch(std::span<const FramePair>(&pair, 1)).front();
}

std::vector<NgccModel::Prediction> NgccModel::PredictBatch(
    std::span<const FramePair> batch) {
  Tensor logits = Forward(batch, Mode::kEval);
  std::vector<Prediction> out;
  out.reserve(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    out.push_back(PredictionFromLogits(logits.row(b, 0)));
  }
  return out;
}

std::vector<nn::Parameter*> NgccModel::parameters() {
  auto out = backbone_.parameters();
  for (auto* p : classifier_.parameters()) out.push_back(p);
  return out;
}

std::vector<nn::Parameter*> NgccModel::buffers() {
  auto out = backbone_.buffers();
  for (auto* p : classifier_.buffers()) out.push_back(p);
  return out;
}

std::size_t NgccModel::ParameterCount() {
  std::size_t total = 0;
  for (auto* p : parameters()) total += p->size();
  return total;
}

void NgccModel::ZeroGrad() {
  backbone_.ZeroGrad();
  classifier_.ZeroGrad();
}

nlohmann::json NgccModel::Describe() const {
  return {{"backbone", backbone_.Describe()}, {"classifier", classifier_.Describe()}};
}

}  // namespace ngcc
