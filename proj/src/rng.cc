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

#include "ngcc/rng.h"

#include <cmath>

namespace ngcc {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t DeriveSeed(uint64_t base, std::string_view stream, uint64_t index) {
  // FNV-1a over the stream name keeps the mapping stable across platforms.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return SplitMix64(SplitMix64(base ^ h) + index);
}

double Uniform(Rng& rng, double lo, double hi) {
  // 53 random mantissa bits; avoids implementation-defined distributions.
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  if (lo == hi) return lo;
  return lo + (hi - lo) * u;
}

double Gaussian(Rng& rng) {
  // Box-Muller; one draw per call keeps the stream position predictable.
  double u1 = 0.0;
  do {
    u1 = Uniform(rng, 0.0, 1.0);
  } while (u1 <= 0.0);
  double u2 = Uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace ngcc
