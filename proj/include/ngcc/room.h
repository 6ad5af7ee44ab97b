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

#ifndef NGCC_ROOM_H_
#define NGCC_ROOM_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ngcc/rng.h"
#include "ngcc/signal.h"

namespace ngcc {

using Position = std::array<double, 3>;

inline constexpr double kSpeedOfSound = 343.0;
inline constexpr int kMaxImageOrder = 40;
inline constexpr double kWallMargin = 0.1;

double Distance(const Position& a, const Position& b);

// Shoebox room with uniform wall absorption. A t60 of zero means anechoic.
struct RoomSpec {
  std::array<double, 3> dimensions{};
  double t60 = 0.0;
  double speed_of_sound = kSpeedOfSound;

  bool anechoic() const { return t60 == 0.0; }
  double volume() const;
  double surface_area() const;
  bool Contains(const Position& p) const;
  void Validate() const;
};

// Energy absorption coefficient from Sabine's formula 0.161 V / (S T60),
// clamped to 1. Fails when the clamp would more than halve the raw value.
double SabineAbsorption(const RoomSpec& room);

// Smallest reflection order whose nearest image lies beyond c * T60,
// capped at kMaxImageOrder. Zero for anechoic rooms.
int DefaultMaxOrder(const RoomSpec& room, const Position& source,
                    const Position& mic);

// Impulse response; taps[i] is the response at sample start + i. start can
// be negative when the direct path is shorter than the interpolator half
// length.
struct Rir {
  long start = 0;
  std::vector<double> taps;
  double sample_rate = 0.0;

  double At(long t) const;
};

Rir RenderRir(const RoomSpec& room, const Position& source, const Position& mic,
              int max_order, double sample_rate);

struct Scene {
  RoomSpec room;
  Position mic1{};
  Position mic2{};
  Position source{};
  // +infinity means noise free.
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  int true_delay_samples = 0;
};

// round((|r1 - rs| - |r2 - rs|) * fs / c).
int TrueDelay(const Scene& scene, double sample_rate);

// True delay of the scene clamped into [-max_lag, max_lag] of its mic pair.
int LabelDelay(const Scene& scene, double sample_rate);

struct FramePair {
  Frame x1;
  Frame x2;
};

struct PropagateOptions {
  std::optional<int> max_order;  // DefaultMaxOrder when unset
  std::size_t frame_length = 2048;
  double sample_rate = 16000.0;
  // Start of the analysis window in the dry signal. The window in the
  // recordings begins at this offset plus the direct-path delay of the
  // nearer microphone.
  std::size_t frame_offset = 0;
  // Selects the noise sub-stream, so several windows of one scene draw
  // independent noise.
  std::uint64_t window_index = 0;
};

// x_i = h_i * s + w_i over one analysis window, with white Gaussian noise
// scaled per microphone to the scene SNR measured on that window.
FramePair Propagate(const Scene& scene, std::span<const double> signal,
                    const PropagateOptions& options);

// Sampling ranges for SampleScene. Sources keep wall_margin from every wall.
struct SceneRanges {
  std::pair<double, double> t60_s{0.2, 1.0};
  std::pair<double, double> snr_db{0.0, 30.0};
  double wall_margin = kWallMargin;
};

Scene SampleScene(const RoomSpec& room, const Position& mic1,
                  const Position& mic2, const SceneRanges& ranges,
                  double sample_rate, Rng& rng);

}  // namespace ngcc

#endif  // NGCC_ROOM_H_
