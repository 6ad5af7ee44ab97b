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

#include "ngcc/error.h"
#include "ngcc/nn/layers.h"
#include "ngcc/parallel.h"

namespace ngcc::nn {

BatchNorm1d::BatchNorm1d(std::string name, int channels, double momentum,
                         double epsilon)
    : channels_(channels),
      momentum_(momentum),
      epsilon_(epsilon),
      scale_(name + ".scale", {static_cast<std::size_t>(channels)}),
      offset_(name + ".offset", {static_cast<std::size_t>(channels)}),
      running_mean_(name + ".running_mean", {static_cast<std::size_t>(channels)}),
      running_var_(name + ".running_var", {static_cast<std::size_t>(channels)}) {
  Require(channels > 0, ErrorKind::kInvalidArgument,
          "batchnorm needs at least one channel");
  std::fill(scale_.value.begin(), scale_.value.end(), 1.0);
  std::fill(running_var_.value.begin(), running_var_.value.end(), 1.0);
}

nlohmann::json BatchNorm1d::Describe() const {
  return {{"kind", kind()},
          {"name", scale_.name.substr(0, scale_.name.size() - 6)},
          {"channels", channels_},
          {"momentum", momentum_},
          {"epsilon", epsilon_}};
}

Tensor BatchNorm1d::Forward(const Tensor& x, Mode mode) {
  const Shape s = x.shape();
  Require(s.channels == static_cast<std::size_t>(channels_), ErrorKind::kShape,
          "batchnorm expects " + std::to_string(channels_) +
              " channels, got " + s.ToString());
  Require(mode == Mode::kEval || s.batch >= 2, ErrorKind::kInvalidBatch,
          "train-mode batchnorm needs a batch of at least 2");
  Record rec{mode, Tensor(s), std::vector<double>(channels_)};
  Tensor out(s);
  const double count = static_cast<double>(s.batch * s.length);
  ParallelFor(static_cast<std::size_t>(channels_), [&](std::size_t c) {
    double mean, var;
    if (mode == Mode::kTrain) {
      double sum = 0.0;
      for (std::size_t b = 0; b < s.batch; ++b) {
        for (double v : x.row(b, c)) sum += v;
      }
      mean = sum / count;
      double sq = 0.0;
      for (std::size_t b = 0; b < s.batch; ++b) {
        for (double v : x.row(b, c)) sq += (v - mean) * (v - mean);
      }
      var = sq / count;
      const double unbiased = count > 1.0 ? sq / (count - 1.0) : var;
      running_mean_.value[c] =
          (1.0 - momentum_) * running_mean_.value[c] + momentum_ * mean;
      running_var_.value[c] =
          (1.0 - momentum_) * running_var_.value[c] + momentum_ * unbiased;
    } else {
      mean = running_mean_.value[c];
      var = running_var_.value[c];
    }
    const double inv_std = 1.0 / std::sqrt(var + epsilon_);
    rec.inv_std[c] = inv_std;
    const double g = scale_.value[c], o = offset_.value[c];
    for (std::size_t b = 0; b < s.batch; ++b) {
      auto src = x.row(b, c);
      auto nrm = rec.normalized.row(b, c);
      auto dst = out.row(b, c);
      for (std::size_t i = 0; i < s.length; ++i) {
        nrm[i] = (src[i] - mean) * inv_std;
        dst[i] = g * nrm[i] + o;
      }
    }
  });
  record_ = std::move(rec);
  return out;
}

Tensor BatchNorm1d::Backward(const Tensor& grad_out) {
  RequireGraph(record_.has_value());
  Record rec = std::move(*record_);
  record_.reset();
  const Shape s = rec.normalized.shape();
  Require(grad_out.shape() == s, ErrorKind::kShape,
          "batchnorm gradient shape mismatch");
  Tensor grad_in(s);
  const double count = static_cast<double>(s.batch * s.length);
  ParallelFor(static_cast<std::size_t>(channels_), [&](std::size_t c) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t b = 0; b < s.batch; ++b) {
      auto g = grad_out.row(b, c);
      auto nrm = rec.normalized.row(b, c);
      for (std::size_t i = 0; i < s.length; ++i) {
        sum_g += g[i];
        sum_gx += g[i] * nrm[i];
      }
    }
    scale_.grad[c] += sum_gx;
    offset_.grad[c] += sum_g;
    const double gamma = scale_.value[c];
    const double k = gamma * rec.inv_std[c];
    for (std::size_t b = 0; b < s.batch; ++b) {
      auto g = grad_out.row(b, c);
      auto nrm = rec.normalized.row(b, c);
      auto dst = grad_in.row(b, c);
      if (rec.mode == Mode::kTrain) {
        for (std::size_t i = 0; i < s.length; ++i) {
          dst[i] = k * (g[i] - sum_g / count - nrm[i] * sum_gx / count);
        }
      } else {
        for (std::size_t i = 0; i < s.length; ++i) dst[i] = k * g[i];
      }
    }
  });
  return grad_in;
}

}  // namespace ngcc::nn
