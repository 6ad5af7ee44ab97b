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

#include "ngcc/room.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ngcc/error.h"
#include "ngcc/gcc.h"

namespace ngcc {
namespace {

// Image sources use precomputed interpolators at 1/4096-sample resolution.
constexpr int kFracSteps = 4096;

const std::vector<double>& KernelTable() {
  static const std::vector<double> table = [] {
    std::vector<double> t(static_cast<std::size_t>(kFracSteps) *
                          kFractionalDelayLength);
    for (int s = 0; s < kFracSteps; ++s) {
      FractionalDelayKernel k = MakeFractionalDelayKernel(
          static_cast<double>(s) / kFracSteps, kFractionalDelayLength);
      std::copy(k.taps.begin(), k.taps.end(),
                t.begin() + static_cast<std::ptrdiff_t>(s) * kFractionalDelayLength);
    }
    return t;
  }();
  return table;
}

// Image coordinate along one axis for image index i; |i| reflections.
double ImageCoordinate(int i, double length, double source) {
  return (i % 2 == 0) ? i * length + source : (i + 1) * length - source;
}

void CheckInside(const RoomSpec& room, const Position& p, const char* what) {
  Require(room.Contains(p), ErrorKind::kDegenerateGeometry,
          std::string(what) + " is not strictly inside the room");
}

}  // namespace

double Distance(const Position& a, const Position& b) {
  double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double RoomSpec::volume() const {
  return dimensions[0] * dimensions[1] * dimensions[2];
}

double RoomSpec::surface_area() const {
  const auto& d = dimensions;
  return 2.0 * (d[0] * d[1] + d[0] * d[2] + d[1] * d[2]);
}

bool RoomSpec::Contains(const Position& p) const {
  for (int a = 0; a < 3; ++a) {
    if (!(p[a] > 0.0 && p[a] < dimensions[a])) return false;
  }
  return true;
}

void RoomSpec::Validate() const {
  for (double d : dimensions) {
    Require(d > 0.0 && std::isfinite(d), ErrorKind::kInvalidArgument,
            "room dimensions must be positive");
  }
  Require(t60 >= 0.0 && std::isfinite(t60), ErrorKind::kInvalidArgument,
          "t60 must be positive, or zero for an anechoic room");
  Require(speed_of_sound > 0.0, ErrorKind::kInvalidArgument,
          "speed of sound must be positive");
}

double SabineAbsorption(const RoomSpec& room) {
  room.Validate();
  Require(room.t60 > 0.0, ErrorKind::kInvalidArgument,
          "Sabine absorption needs t60 > 0");
  const double alpha =
      0.161 * room.volume() / (room.surface_area() * room.t60);
  if (alpha <= 1.0) return alpha;
  Require(alpha <= 2.0, ErrorKind::kInfeasible,
          "room is too small for the requested t60 (absorption " +
              std::to_string(alpha) + ")");
  return 1.0;
}

int DefaultMaxOrder(const RoomSpec& room, const Position& source,
                    const Position& mic) {
  room.Validate();
  if (room.anechoic()) return 0;
  const double reach = room.speed_of_sound * room.t60;
  // Nearest image per axis for each reflection count.
  std::array<std::vector<double>, 3> nearest;
  for (int a = 0; a < 3; ++a) {
    nearest[a].resize(kMaxImageOrder + 1);
    for (int r = 0; r <= kMaxImageOrder; ++r) {
      double best = std::numeric_limits<double>::infinity();
      for (int i : {r, -r}) {
        best = std::min(best, std::abs(ImageCoordinate(i, room.dimensions[a],
                                                       source[a]) - mic[a]));
      }
      nearest[a][r] = best * best;
    }
  }
  for (int order = 0; order <= kMaxImageOrder; ++order) {
    double closest = std::numeric_limits<double>::infinity();
    for (int rx = 0; rx <= order; ++rx) {
      for (int ry = 0; rx + ry <= order; ++ry) {
        int rz = order - rx - ry;
        closest = std::min(closest,
                           nearest[0][rx] + nearest[1][ry] + nearest[2][rz]);
      }
    }
    if (std::sqrt(closest) > reach) return order;
  }
  return kMaxImageOrder;
}

double Rir::At(long t) const {
  long i = t - start;
  if (i < 0 || i >= static_cast<long>(taps.size())) return 0.0;
  return taps[i];
}

Rir RenderRir(const RoomSpec& room, const Position& source, const Position& mic,
              int max_order, double sample_rate) {
  room.Validate();
  Require(max_order >= 0, ErrorKind::kInvalidArgument,
          "max_order must be non-negative");
  Require(sample_rate > 0.0, ErrorKind::kInvalidArgument,
          "sample rate must be positive");
  CheckInside(room, source, "source");
  CheckInside(room, mic, "microphone");
  const double direct = Distance(source, mic);
  Require(direct > 1e-9, ErrorKind::kDegenerateGeometry,
          "source coincides with the microphone");

  const double reflection =
      (room.anechoic() || max_order == 0) ? 0.0
                                          : std::sqrt(1.0 - SabineAbsorption(room));
  // Images beyond c * T60 are skipped.
  const double reach = room.anechoic()
                           ? std::numeric_limits<double>::infinity()
                           : std::max(room.speed_of_sound * room.t60, direct);
  const double samples_per_meter = sample_rate / room.speed_of_sound;
  const long half = kFractionalDelayLength / 2;

  struct Arrival {
    double delay;
    double gain;
  };
  std::vector<Arrival> arrivals;
  std::vector<double> pow_reflection(max_order + 1, 1.0);
  for (int r = 1; r <= max_order; ++r) {
    pow_reflection[r] = pow_reflection[r - 1] * reflection;
  }
  const auto& dim = room.dimensions;
  for (int ix = -max_order; ix <= max_order; ++ix) {
    const double dx = ImageCoordinate(ix, dim[0], source[0]) - mic[0];
    const int rem_x = max_order - std::abs(ix);
    for (int iy = -rem_x; iy <= rem_x; ++iy) {
      const double dy = ImageCoordinate(iy, dim[1], source[1]) - mic[1];
      const int rem_y = rem_x - std::abs(iy);
      const double dxy2 = dx * dx + dy * dy;
      if (dxy2 > reach * reach) continue;
      for (int iz = -rem_y; iz <= rem_y; ++iz) {
        const double dz = ImageCoordinate(iz, dim[2], source[2]) - mic[2];
        const double d = std::sqrt(dxy2 + dz * dz);
        if (d > reach) continue;
        const int order = std::abs(ix) + std::abs(iy) + std::abs(iz);
        const double gain =
            pow_reflection[order] / (4.0 * std::numbers::pi * d);
        if (gain == 0.0) continue;
        arrivals.push_back({d * samples_per_meter, gain});
      }
    }
  }

  double max_delay = 0.0;
  for (const auto& a : arrivals) max_delay = std::max(max_delay, a.delay);
  Rir rir;
  rir.sample_rate = sample_rate;
  rir.start = std::min(0L, static_cast<long>(std::floor(direct * samples_per_meter)) - half);
  const long end = static_cast<long>(std::floor(max_delay)) + half + 1;
  rir.taps.assign(static_cast<std::size_t>(end - rir.start), 0.0);

  const auto& table = KernelTable();
  for (const auto& a : arrivals) {
    double whole = std::floor(a.delay);
    long step = std::lround((a.delay - whole) * kFracSteps);
    if (step == kFracSteps) {
      whole += 1.0;
      step = 0;
    }
    const double* kernel =
        table.data() + static_cast<std::ptrdiff_t>(step) * kFractionalDelayLength;
    double* out = rir.taps.data() + (static_cast<long>(whole) - half - rir.start);
    for (int t = 0; t < kFractionalDelayLength; ++t) out[t] += a.gain * kernel[t];
  }
  return rir;
}

int TrueDelay(const Scene& scene, double sample_rate) {
  const double d1 = Distance(scene.mic1, scene.source);
  const double d2 = Distance(scene.mic2, scene.source);
  return static_cast<int>(
      std::lround((d1 - d2) * sample_rate / scene.room.speed_of_sound));
}

int LabelDelay(const Scene& scene, double sample_rate) {
  const int max_lag = MaxLag(Distance(scene.mic1, scene.mic2), sample_rate,
                             scene.room.speed_of_sound);
  return std::clamp(TrueDelay(scene, sample_rate), -max_lag, max_lag);
}

namespace {

// y[t0 + n] = sum_i h(i) s(t0 + n - i) for n in [0, length).
std::vector<double> ConvolveWindow(std::span<const double> signal,
                                   const Rir& rir, long t0, std::size_t length) {
  const long taps = static_cast<long>(rir.taps.size());
  const long seg_len = static_cast<long>(length) + taps - 1;
  const long seg_begin = t0 - rir.start - taps + 1;
  const std::size_t fft_len = NextPowerOfTwo(static_cast<std::size_t>(seg_len));
  std::vector<Complex> seg(fft_len), h(fft_len);
  const long sig_len = static_cast<long>(signal.size());
  for (long q = 0; q < seg_len; ++q) {
    long idx = seg_begin + q;
    if (idx >= 0 && idx < sig_len) seg[q] = signal[idx];
  }
  for (long j = 0; j < taps; ++j) h[j] = rir.taps[j];
  Fft(seg);
  Fft(h);
  for (std::size_t k = 0; k < fft_len; ++k) seg[k] *= h[k];
  InverseFftUnnormalized(seg);
  std::vector<double> out(length);
  const double scale = 1.0 / static_cast<double>(fft_len);
  for (std::size_t n = 0; n < length; ++n) out[n] = seg[n + taps - 1].real() * scale;
  return out;
}

}  // namespace

FramePair Propagate(const Scene& scene, std::span<const double> signal,
                    const PropagateOptions& options) {
  scene.room.Validate();
  CheckInside(scene.room, scene.mic1, "mic1");
  CheckInside(scene.room, scene.mic2, "mic2");
  CheckInside(scene.room, scene.source, "source");
  Require(IsPowerOfTwo(options.frame_length), ErrorKind::kInvalidLength,
          "frame length must be a power of two");
  Require(options.frame_offset + options.frame_length <= signal.size(),
          ErrorKind::kInvalidLength,
          "signal too short for the requested analysis window");

  const double fs = options.sample_rate;
  const double c = scene.room.speed_of_sound;
  const double d1 = Distance(scene.mic1, scene.source);
  const double d2 = Distance(scene.mic2, scene.source);
  const long t0 = static_cast<long>(options.frame_offset) +
                  static_cast<long>(std::floor(std::min(d1, d2) * fs / c));

  std::array<const Position*, 2> mics = {&scene.mic1, &scene.mic2};
  std::array<std::vector<double>, 2> out;
  for (int m = 0; m < 2; ++m) {
    const int order = options.max_order.has_value()
                          ? *options.max_order
                          : DefaultMaxOrder(scene.room, scene.source, *mics[m]);
    Rir rir = RenderRir(scene.room, scene.source, *mics[m], order, fs);
    out[m] = ConvolveWindow(signal, rir, t0, options.frame_length);
    if (!std::isfinite(scene.snr_db)) continue;
    double signal_power = 0.0;
    for (double v : out[m]) signal_power += v * v;
    signal_power /= static_cast<double>(out[m].size());
    Require(signal_power > 0.0, ErrorKind::kUndefinedSnr,
            "analysis window is silent; SNR is undefined");
    Rng rng = MakeRng(scene.seed, m == 0 ? "noise-mic1" : "noise-mic2",
                      options.window_index);
    std::vector<double> noise(out[m].size());
    double noise_power = 0.0;
    for (double& v : noise) {
      v = Gaussian(rng);
      noise_power += v * v;
    }
    noise_power /= static_cast<double>(noise.size());
    const double scale = std::sqrt(
        signal_power / std::pow(10.0, scene.snr_db / 10.0) / noise_power);
    for (std::size_t i = 0; i < noise.size(); ++i) out[m][i] += scale * noise[i];
  }
  return {Frame(std::move(out[0]), fs), Frame(std::move(out[1]), fs)};
}

Scene SampleScene(const RoomSpec& room, const Position& mic1,
                  const Position& mic2, const SceneRanges& ranges,
                  double sample_rate, Rng& rng) {
  room.Validate();
  CheckInside(room, mic1, "mic1");
  CheckInside(room, mic2, "mic2");
  Require(ranges.t60_s.first <= ranges.t60_s.second &&
              ranges.snr_db.first <= ranges.snr_db.second,
          ErrorKind::kInvalidArgument, "empty sampling range");
  Scene scene;
  scene.room = room;
  scene.mic1 = mic1;
  scene.mic2 = mic2;
  for (int a = 0; a < 3; ++a) {
    const double lo = ranges.wall_margin;
    const double hi = room.dimensions[a] - ranges.wall_margin;
    Require(hi > lo, ErrorKind::kInfeasible, "room smaller than wall margin");
    scene.source[a] = Uniform(rng, lo, hi);
  }
  scene.room.t60 = Uniform(rng, ranges.t60_s.first, ranges.t60_s.second);
  scene.snr_db = Uniform(rng, ranges.snr_db.first, ranges.snr_db.second);
  scene.seed = rng();
  scene.true_delay_samples = LabelDelay(scene, sample_rate);
  return scene;
}

}  // namespace ngcc
