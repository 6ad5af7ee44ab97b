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

#include <algorithm>
#include <cmath>

#include "ngcc/error.h"
#include "ngcc/nn/layers.h"

namespace ngcc::nn {

Tensor LeakyRelu::Forward(const Tensor& x, Mode) {
  Tensor out(x.shape());
  auto src = x.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = src[i] > 0.0 ? src[i] : slope_ * src[i];
  }
  input_ = x;
  return out;
}

Tensor LeakyRelu::Backward(const Tensor& grad_out) {
  RequireGraph(input_.has_value());
  Tensor x = std::move(*input_);
  input_.reset();
  Require(grad_out.shape() == x.shape(), ErrorKind::kShape,
          "leaky relu gradient shape mismatch");
  Tensor grad_in(x.shape());
  auto src = x.values();
  auto g = grad_out.values();
  auto dst = grad_in.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = src[i] > 0.0 ? g[i] : slope_ * g[i];
  }
  return grad_in;
}

nlohmann::json LeakyRelu::Describe() const {
  return {{"kind", kind()}, {"negative_slope", slope_}};
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - peak);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

Tensor Softmax(const Tensor& logits) {
  Tensor out(logits.shape());
  for (std::size_t b = 0; b < logits.shape().batch; ++b) {
    for (std::size_t c = 0; c < logits.shape().channels; ++c) {
      auto p = Softmax(logits.row(b, c));
      std::copy(p.begin(), p.end(), out.row(b, c).begin());
    }
  }
  return out;
}

}  // namespace ngcc::nn
