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

#ifndef NGCC_RNG_H_
#define NGCC_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace ngcc {

using Rng = std::mt19937_64;

// Every random quantity is drawn from a named sub-stream of one base seed
// ("scene", "init", "batch-order", ...), so each component can be
// reproduced on its own.
uint64_t DeriveSeed(uint64_t base, std::string_view stream, uint64_t index = 0);

inline Rng MakeRng(uint64_t base, std::string_view stream, uint64_t index = 0) {
  return Rng(DeriveSeed(base, stream, index));
}

double Uniform(Rng& rng, double lo, double hi);
double Gaussian(Rng& rng);

}  // namespace ngcc

#endif  // NGCC_RNG_H_
