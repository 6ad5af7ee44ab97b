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

#ifndef NGCC_PARALLEL_H_
#define NGCC_PARALLEL_H_

#include <cstddef>
#include <cstdint>

namespace ngcc {

// Caps the worker count used by ParallelFor. Zero restores the default.
void SetNumThreads(int threads);
int NumThreads();

// Runs fn(i) for i in [0, n). Each index must write only to its own output,
// so results do not depend on scheduling.
template <typename Fn>
void ParallelFor(std::size_t n, Fn&& fn) {
  const std::int64_t count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(NumThreads())
  for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

}  // namespace ngcc

#endif  // NGCC_PARALLEL_H_
