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

#include "ngcc/error.h"
#include "ngcc/nn/layers.h"

namespace ngcc::nn {

void Layer::RequireGraph(bool recorded) const {
  Require(recorded, ErrorKind::kMissingGraph,
          kind() + ": backward called without a recorded forward pass");
}

void Sequential::Add(std::unique_ptr<Layer> layer) {
  layers_.push_back(std::move(layer));
}

Tensor Sequential::Forward(const Tensor& x, Mode mode) {
  Tensor h = x;
  for (auto& layer : layers_) h = layer->Forward(h, mode);
  recorded_ = true;
  return h;
}

Tensor Sequential::Backward(const Tensor& grad_out) {
  Require(recorded_, ErrorKind::kMissingGraph,
          "backward called without a recorded forward pass");
  recorded_ = false;
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->Backward(g);
  }
  return g;
}

std::vector<Parameter*> Sequential::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) {
    for (Parameter* p : layer->parameters()) out.push_back(p);
  }
  return out;
}

std::vector<Parameter*> Sequential::buffers() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) {
    for (Parameter* p : layer->buffers()) out.push_back(p);
  }
  return out;
}

nlohmann::json Sequential::Describe() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : layers_) layers.push_back(layer->Describe());
  return layers;
}

void Sequential::ZeroGrad() {
  for (Parameter* p : parameters()) p->ZeroGrad();
}

}  // namespace ngcc::nn
