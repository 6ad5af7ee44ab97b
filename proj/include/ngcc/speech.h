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

#ifndef NGCC_SPEECH_H_
#define NGCC_SPEECH_H_

#include <vector>

#include "ngcc/rng.h"

namespace ngcc {

// Per-speaker traits of the synthetic voice.
struct VoiceProfile {
  double pitch_low_hz = 80.0;
  double pitch_high_hz = 300.0;
  double formant_scale = 1.0;
};

VoiceProfile RandomVoice(Rng& rng);

// Speech-like test signal: a glottal pulse train with drifting pitch shaped
// by gliding formant resonators, alternating voiced and unvoiced segments,
// and broadband noise bursts. The envelope never drops to silence.
std::vector<double> SynthSpeech(double duration_s, double sample_rate, Rng& rng,
                                const VoiceProfile& voice = VoiceProfile{});

}  // namespace ngcc

#endif  // NGCC_SPEECH_H_
