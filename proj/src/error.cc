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

namespace ngcc {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidLength: return "invalid-length";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kInvalidData: return "invalid-data";
    case ErrorKind::kConjugateSymmetry: return "conjugate-symmetry";
    case ErrorKind::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kUndefinedSnr: return "undefined-snr";
    case ErrorKind::kInvalidBatch: return "invalid-batch";
    case ErrorKind::kMissingGraph: return "missing-graph";
    case ErrorKind::kInvalidLabel: return "invalid-label";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
      kind_(kind) {}

}  // namespace ngcc
