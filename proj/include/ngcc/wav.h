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

#ifndef NGCC_WAV_H_
#define NGCC_WAV_H_

#include <span>
#include <string>
#include <vector>

#include "ngcc/signal.h"

namespace ngcc {

enum class WavFormat { kPcm16, kFloat32 };

inline constexpr double kDefaultSampleRate = 16000.0;

// Reads a mono 16-bit PCM or 32-bit float WAV file. PCM is scaled by
// 1/32768. A sample rate other than `expected_rate` is rejected; there is
// no silent resampling.
std::vector<double> LoadWav(const std::string& path,
                            double expected_rate = kDefaultSampleRate);

void WriteWav(const std::string& path, std::span<const double> samples,
              double sample_rate, WavFormat format);

// Non-overlapping frames of `frame_length` samples; the tail is dropped.
std::vector<Frame> SplitFrames(std::span<const double> samples,
                               std::size_t frame_length, double sample_rate);

}  // namespace ngcc

#endif  // NGCC_WAV_H_
