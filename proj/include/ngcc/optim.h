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

#ifndef NGCC_OPTIM_H_
#define NGCC_OPTIM_H_

#include <cstdint>
#include <vector>

#include "ngcc/nn/tensor.h"

namespace ngcc {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(std::vector<nn::Parameter*> params, AdamOptions options = {});

  // One bias-corrected update of every parameter from its grad. Throws
  // kNumeric, before touching any parameter, if a gradient is not finite.
  void Step(double learning_rate);

  std::int64_t step_count() const { return step_; }
  void set_step_count(std::int64_t step) { step_ = step; }
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  const std::vector<nn::Parameter*>& params() const { return params_; }

 private:
  std::vector<nn::Parameter*> params_;
  AdamOptions options_;
  std::vector<std::vector<double>> m_, v_;
  std::int64_t step_ = 0;
};

// base_lr * (1 + cos(pi * step / total_steps)) / 2.
double CosineLr(std::int64_t step, std::int64_t total_steps, double base_lr);

}  // namespace ngcc

#endif  // NGCC_OPTIM_H_
