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
namespace {

// Pads every row by `pad` on both sides, wrapping or with zeros.
Tensor PadRows(const Tensor& x, std::size_t pad, Padding padding) {
  const Shape s = x.shape();
  const std::size_t n = s.length;
  Tensor out({s.batch, s.channels, n + 2 * pad});
  ParallelFor(s.batch * s.channels, [&](std::size_t r) {
    const std::size_t b = r / s.channels, c = r % s.channels;
    auto src = x.row(b, c);
    auto dst = out.row(b, c);
    for (std::size_t i = 0; i < n; ++i) dst[pad + i] = src[i];
    if (padding == Padding::kCircular) {
      for (std::size_t i = 0; i < pad; ++i) {
        dst[i] = src[(n - pad % n + i) % n];
        dst[pad + n + i] = src[i % n];
      }
    }
  });
  return out;
}

}  // namespace

Conv1d::Conv1d(std::string name, int in_channels, int out_channels,
               int kernel_length, Padding padding)
    : in_(in_channels),
      out_(out_channels),
      kernel_(kernel_length),
      padding_(padding),
      weight_(name + ".weight",
              {static_cast<std::size_t>(out_channels),
               static_cast<std::size_t>(in_channels),
               static_cast<std::size_t>(kernel_length)}),
      bias_(name + ".bias", {static_cast<std::size_t>(out_channels)}) {
  Require(in_channels > 0 && out_channels > 0, ErrorKind::kInvalidArgument,
          "channel counts must be positive");
  Require(kernel_length > 0 && kernel_length % 2 == 1,
          ErrorKind::kInvalidArgument, "kernel length must be odd");
}

void Conv1d::Initialize(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_ * kernel_));
  for (double& w : weight_.value) w = Uniform(rng, -bound, bound);
  for (double& b : bias_.value) b = Uniform(rng, -bound, bound);
}

nlohmann::json Conv1d::Describe() const {
  return {{"kind", kind()},
          {"name", weight_.name.substr(0, weight_.name.size() - 7)},
          {"in_channels", in_},
          {"out_channels", out_},
          {"kernel_length", kernel_},
          {"padding", padding_ == Padding::kCircular ? "circular" : "zero"}};
}

Tensor Conv1d::Forward(const Tensor& x, Mode) {
  const Shape s = x.shape();
  Require(s.channels == static_cast<std::size_t>(in_), ErrorKind::kShape,
          "conv1d expects " + std::to_string(in_) + " input channels, got " +
              s.ToString());
  Require(s.length >= static_cast<std::size_t>(kernel_) ||
              padding_ == Padding::kZero,
          ErrorKind::kShape, "input shorter than the kernel");
  const std::size_t pad = static_cast<std::size_t>(kernel_ / 2);
  Tensor padded = PadRows(x, pad, padding_);
  const std::size_t n = s.length;
  const std::size_t k = static_cast<std::size_t>(kernel_);
  Tensor out({s.batch, static_cast<std::size_t>(out_), n});
  const double* w = weight_.value.data();
  ParallelFor(s.batch * out_, [&](std::size_t r) {
    const std::size_t b = r / out_, co = r % out_;
    double* __restrict y = out.row(b, co).data();
    const double bias = bias_.value[co];
    for (std::size_t i = 0; i < n; ++i) y[i] = bias;
    for (int ci = 0; ci < in_; ++ci) {
      const double* __restrict xp = padded.row(b, ci).data();
      const double* wk = w + (co * in_ + ci) * k;
      for (std::size_t j = 0; j < k; ++j) {
        const double wj = wk[j];
        const double* __restrict src = xp + j;
        for (std::size_t i = 0; i < n; ++i) y[i] += wj * src[i];
      }
    }
  });
  padded_input_ = std::move(padded);
  return out;
}

Tensor Conv1d::Backward(const Tensor& grad_out) {
  RequireGraph(padded_input_.has_value());
  const Tensor padded = std::move(*padded_input_);
  padded_input_.reset();
  const Shape gs = grad_out.shape();
  const std::size_t n = gs.length;
  const std::size_t k = static_cast<std::size_t>(kernel_);
  const std::size_t pad = k / 2;
  Require(gs.channels == static_cast<std::size_t>(out_) &&
              padded.shape().batch == gs.batch &&
              padded.shape().length == n + 2 * pad,
          ErrorKind::kShape, "conv1d gradient shape mismatch");

  // dW[co][ci][j] = sum_b sum_i g[b][co][i] * xpad[b][ci][i + j]
  ParallelFor(static_cast<std::size_t>(out_) * in_, [&](std::size_t r) {
    const std::size_t co = r / in_, ci = r % in_;
    double* gw = weight_.grad.data() + r * k;
    for (std::size_t b = 0; b < gs.batch; ++b) {
      const double* __restrict g = grad_out.row(b, co).data();
      const double* __restrict xp = padded.row(b, ci).data();
      for (std::size_t j = 0; j < k; ++j) {
        double acc = 0.0;
#pragma omp simd reduction(+ : acc)
        for (std::size_t i = 0; i < n; ++i) acc += g[i] * xp[i + j];
        gw[j] += acc;
      }
    }
  });
  for (int co = 0; co < out_; ++co) {
    double acc = 0.0;
    for (std::size_t b = 0; b < gs.batch; ++b) {
      for (double g : grad_out.row(b, co)) acc += g;
    }
    bias_.grad[co] += acc;
  }

  if (!needs_input_grad_) return Tensor();
  // dx[b][ci][i] = sum_co sum_j w[co][ci][j] * g[b][co][i - j + pad], with
  // the same padding rule applied to g.
  Tensor gpad = PadRows(grad_out, pad, padding_);
  Tensor grad_in({gs.batch, static_cast<std::size_t>(in_), n});
  const double* w = weight_.value.data();
  ParallelFor(gs.batch * in_, [&](std::size_t r) {
    const std::size_t b = r / in_, ci = r % in_;
    double* __restrict gx = grad_in.row(b, ci).data();
    for (int co = 0; co < out_; ++co) {
      const double* __restrict gp = gpad.row(b, co).data();
      const double* wk = w + (co * in_ + ci) * k;
      for (std::size_t j = 0; j < k; ++j) {
        const double wj = wk[j];
        const double* __restrict src = gp + 2 * pad - j;
        for (std::size_t i = 0; i < n; ++i) gx[i] += wj * src[i];
      }
    }
  });
  return grad_in;
}

}  // namespace ngcc::nn
