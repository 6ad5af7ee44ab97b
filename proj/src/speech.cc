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

#include "ngcc/speech.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "ngcc/error.h"

namespace ngcc {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Two-pole resonator with unit gain at its center frequency.
class Resonator {
 public:
  void Tune(double center_hz, double bandwidth_hz, double fs) {
    const double r = std::exp(-std::numbers::pi * bandwidth_hz / fs);
    const double theta = kTwoPi * center_hz / fs;
    a1_ = 2.0 * r * std::cos(theta);
    a2_ = -r * r;
    gain_ = (1.0 - r) * std::sqrt(1.0 - 2.0 * r * std::cos(2.0 * theta) + r * r);
  }

  double Process(double x) {
    const double y = gain_ * x + a1_ * y1_ + a2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a1_ = 0.0, a2_ = 0.0, gain_ = 1.0;
  double y1_ = 0.0, y2_ = 0.0;
};

// Exponential glide toward a target, re-targeted by the caller.
struct Glide {
  double value;
  double target;
  void Step(double rate) { value += rate * (target - value); }
};

}  // namespace

VoiceProfile RandomVoice(Rng& rng) {
  VoiceProfile v;
  const double center = Uniform(rng, 100.0, 240.0);
  const double spread = Uniform(rng, 0.25, 0.45);
  v.pitch_low_hz = std::max(80.0, center * (1.0 - spread));
  v.pitch_high_hz = std::min(300.0, center * (1.0 + spread));
  v.formant_scale = Uniform(rng, 0.85, 1.2);
  return v;
}

std::vector<double> SynthSpeech(double duration_s, double sample_rate, Rng& rng,
                                const VoiceProfile& voice) {
  Require(duration_s > 0.0 && sample_rate > 0.0, ErrorKind::kInvalidArgument,
          "duration and sample rate must be positive");
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  std::vector<double> out(n, 0.0);

  const double fs = sample_rate;
  Glide pitch{Uniform(rng, voice.pitch_low_hz, voice.pitch_high_hz), 0.0};
  pitch.target = pitch.value;
  const std::array<std::pair<double, double>, 3> formant_ranges = {
      {{300.0, 850.0}, {850.0, 2300.0}, {2000.0, 3300.0}}};
  const std::array<double, 3> bandwidths = {90.0, 130.0, 220.0};
  std::array<Glide, 3> formants;
  for (int f = 0; f < 3; ++f) {
    double v = Uniform(rng, formant_ranges[f].first, formant_ranges[f].second) *
               voice.formant_scale;
    formants[f] = {v, v};
  }
  std::array<Resonator, 3> voiced_tract, noise_tract;

  double phase = 0.0;
  double tilt = 0.0;
  std::size_t segment_end = 0;
  std::size_t segment_start = 0;
  bool voiced = true;
  double amplitude = 1.0;
  const double edge = 0.015 * fs;
  const double glide_rate = 1.0 / (0.04 * fs);

  for (std::size_t i = 0; i < n; ++i) {
    if (i >= segment_end) {
      segment_start = i;
      segment_end = i + static_cast<std::size_t>(Uniform(rng, 0.06, 0.25) * fs);
      voiced = Uniform(rng, 0.0, 1.0) < 0.75;
      amplitude = Uniform(rng, 0.5, 1.0);
      pitch.target = Uniform(rng, voice.pitch_low_hz, voice.pitch_high_hz);
      for (int f = 0; f < 3; ++f) {
        formants[f].target = Uniform(rng, formant_ranges[f].first,
                                     formant_ranges[f].second) *
                             voice.formant_scale;
      }
    }
    pitch.Step(glide_rate);
    if (i % 32 == 0) {
      for (int f = 0; f < 3; ++f) {
        formants[f].Step(32.0 * glide_rate);
        const double center = std::min(formants[f].value, 0.45 * fs);
        voiced_tract[f].Tune(center, bandwidths[f], fs);
        noise_tract[f].Tune(center, 2.0 * bandwidths[f], fs);
      }
    }

    // Raised-cosine segment edges over a floor so no window is silent.
    const double pos = static_cast<double>(i - segment_start);
    const double remaining = static_cast<double>(segment_end - i);
    double env = 1.0;
    if (pos < edge) env = 0.5 - 0.5 * std::cos(std::numbers::pi * pos / edge);
    if (remaining < edge) {
      env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * remaining / edge));
    }
    env = amplitude * (0.2 + 0.8 * env);

    double excitation = 0.0;
    phase += pitch.value / fs;
    if (phase >= 1.0) {
      phase -= 1.0;
      excitation = 1.0;
    }
    // One-pole tilt gives the pulse train a falling glottal spectrum.
    tilt = 0.9 * tilt + excitation;
    const double noise = Gaussian(rng);

    double sample = 0.0;
    if (voiced) {
      double v = tilt + 0.05 * noise;
      double tract = 0.0;
      for (auto& r : voiced_tract) tract += r.Process(v);
      // Breath noise keeps some source energy up to the Nyquist frequency.
      sample = tract + 0.01 * noise;
    } else {
      double tract = 0.0;
      for (auto& r : noise_tract) tract += r.Process(noise);
      // Broadband burst on top of the shaped noise.
      sample = 0.35 * tract + 0.08 * noise;
    }
    out[i] = env * sample;
  }

  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(n);
  double power = 0.0;
  for (double& v : out) {
    v -= mean;
    power += v * v;
  }
  const double rms = std::sqrt(power / static_cast<double>(n));
  if (rms > 0.0) {
    for (double& v : out) v *= 0.1 / rms;
  }
  return out;
}

}  // namespace ngcc
