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

#include "ngcc/optim.h"

#include <cmath>
#include <numbers>
#include <string>

#include "ngcc/error.h"

namespace ngcc {

Adam::Adam(std::vector<nn::Parameter*> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (const auto* p : params_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void Adam::Step(double learning_rate) {
  for (const auto* p : params_) {
    Require(p->grad.size() == p->value.size(), ErrorKind::kShape,
            "gradient of " + p->name + " does not match its value");
    for (std::size_t i = 0; i < p->grad.size(); ++i) {
      if (!std::isfinite(p->grad[i])) {
        throw Error(ErrorKind::kNumeric, "non-finite gradient in " + p->name +
                                             "[" + std::to_string(i) + "] at step " +
                                             std::to_string(step_ + 1));
      }
    }
  }
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    nn::Parameter& p = *params_[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p.value[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

double CosineLr(std::int64_t step, std::int64_t total_steps, double base_lr) {
  Require(total_steps > 0 && step >= 0 && step <= total_steps,
          ErrorKind::kInvalidArgument, "cosine schedule needs 0 <= step <= total");
  const double t = static_cast<double>(step) / static_cast<double>(total_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace ngcc
