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

#ifndef NGCC_NN_TENSOR_H_
#define NGCC_NN_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ngcc::nn {

struct Shape {
  std::size_t batch = 0;
  std::size_t channels = 0;
  std::size_t length = 0;

  std::size_t size() const { return batch * channels * length; }
  bool operator==(const Shape&) const = default;
  std::string ToString() const;
};

// Dense (batch, channels, length) array of doubles, row-major.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::span<double> row(std::size_t b, std::size_t c) {
    return {values_.data() + (b * shape_.channels + c) * shape_.length,
            shape_.length};
  }
  std::span<const double> row(std::size_t b, std::size_t c) const {
    return {values_.data() + (b * shape_.channels + c) * shape_.length,
            shape_.length};
  }
  double& at(std::size_t b, std::size_t c, std::size_t n) {
    return values_[(b * shape_.channels + c) * shape_.length + n];
  }
  double at(std::size_t b, std::size_t c, std::size_t n) const {
    return values_[(b * shape_.channels + c) * shape_.length + n];
  }

  // Throws kNumeric naming `where` if any value is NaN or infinite.
  void CheckFinite(const std::string& where) const;

 private:
  Shape shape_;
  std::vector<double> values_;
};

// Circular shift of every row along the length axis.
Tensor ShiftLength(const Tensor& x, long shift);

// Learnable tensor plus its gradient accumulator.
struct Parameter {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Parameter() = default;
  Parameter(std::string name, std::vector<std::size_t> shape);
  std::size_t size() const { return value.size(); }
  void ZeroGrad();
};

enum class Mode { kTrain, kEval };

}  // namespace ngcc::nn

#endif  // NGCC_NN_TENSOR_H_
