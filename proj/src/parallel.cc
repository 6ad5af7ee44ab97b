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

#include "ngcc/parallel.h"

#include <omp.h>

#include <atomic>

namespace ngcc {
namespace {
std::atomic<int> g_threads{0};
}  // namespace

void SetNumThreads(int threads) { g_threads = threads < 0 ? 0 : threads; }

int NumThreads() {
  int t = g_threads.load();
  return t > 0 ? t : omp_get_max_threads();
}

}  // namespace ngcc
