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

#include "ngcc/nn/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "ngcc/error.h"

namespace ngcc::nn {

std::string Shape::ToString() const {
  return "(" + std::to_string(batch) + ", " + std::to_string(channels) + ", " +
         std::to_string(length) + ")";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(shape), values_(shape.size(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values)) {
  Require(values_.size() == shape_.size(), ErrorKind::kShape,
          "value count does not match shape " + shape_.ToString());
}

void Tensor::CheckFinite(const std::string& where) const {
  for (double v : values_) {
    Require(std::isfinite(v), ErrorKind::kNumeric,
            "non-finite value in " + where);
  }
}

Tensor ShiftLength(const Tensor& x, long shift) {
  Tensor out(x.shape());
  const long n = static_cast<long>(x.shape().length);
  if (n == 0) return out;
  long s = shift % n;
  if (s < 0) s += n;
  for (std::size_t b = 0; b < x.shape().batch; ++b) {
    for (std::size_t c = 0; c < x.shape().channels; ++c) {
      auto src = x.row(b, c);
      auto dst = out.row(b, c);
      for (long i = 0; i < n; ++i) dst[(i + s) % n] = src[i];
    }
  }
  return out;
}

Parameter::Parameter(std::string name, std::vector<std::size_t> shape)
    : name(std::move(name)), shape(std::move(shape)) {
  const std::size_t count = std::accumulate(
      this->shape.begin(), this->shape.end(), std::size_t{1}, std::multiplies<>());
  value.assign(count, 0.0);
  grad.assign(count, 0.0);
}

void Parameter::ZeroGrad() { std::fill(grad.begin(), grad.end(), 0.0); }

}  // namespace ngcc::nn
