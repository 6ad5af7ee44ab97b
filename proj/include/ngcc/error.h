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

#ifndef NGCC_ERROR_H_
#define NGCC_ERROR_H_

#include <stdexcept>
#include <string>

namespace ngcc {

enum class ErrorKind {
  kInvalidLength,
  kInvalidArgument,
  kShape,
  kInvalidData,
  kConjugateSymmetry,
  kDegenerateGeometry,
  kInfeasible,
  kUndefinedSnr,
  kInvalidBatch,
  kMissingGraph,
  kInvalidLabel,
  kNumeric,
  kConfig,
  kIo,
};

const char* ErrorKindName(ErrorKind kind);

// All library failures are reported with this exception type. The kind is
// what callers (the CLI in particular) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Throws Error(kind, message) when `condition` is false.
inline void Require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace ngcc

#endif  // NGCC_ERROR_H_
