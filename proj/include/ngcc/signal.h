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

#ifndef NGCC_SIGNAL_H_
#define NGCC_SIGNAL_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ngcc {

using Complex = std::complex<double>;

bool IsPowerOfTwo(std::size_t n);
std::size_t NextPowerOfTwo(std::size_t n);

// Fixed-length window of real samples. The length is a power of two and
// every sample is finite; the constructor enforces both.
class Frame {
 public:
  Frame() = default;
  Frame(std::vector<double> samples, double sample_rate);

  std::size_t size() const { return samples_.size(); }
  double sample_rate() const { return sample_rate_; }
  std::span<const double> samples() const { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }

 private:
  std::vector<double> samples_;
  double sample_rate_ = 0.0;
};

struct Spectrum {
  std::vector<Complex> bins;
  double sample_rate = 0.0;
};

// In-place radix-2 transform. Forward uses exp(-i2πkn/N); the inverse is
// unnormalized (callers divide by N). Length must be a power of two.
void Fft(std::span<Complex> data);
void InverseFftUnnormalized(std::span<Complex> data);

Spectrum Dft(const Frame& frame);

// Inverse of Dft. Imaginary residue up to 1e-6 of the output norm is
// discarded; anything larger means the bins were not conjugate symmetric.
Frame Idft(const Spectrum& spectrum);

// out[n] = x[(n - shift) mod N]; any integer shift is accepted.
Frame CircularShift(const Frame& frame, long shift);
std::vector<double> CircularShift(std::span<const double> x, long shift);

// Hann-windowed sinc interpolator that delays a signal by a real number of
// samples. Taps cover offsets first_offset .. first_offset + taps.size() - 1,
// centered on floor(delay).
struct FractionalDelayKernel {
  long first_offset = 0;
  std::vector<double> taps;

  // Tap value at an absolute sample offset; zero outside the support.
  double At(long offset) const;
};

FractionalDelayKernel MakeFractionalDelayKernel(double delay, int length);

inline constexpr int kFractionalDelayLength = 81;

// Full linear convolution, computed with zero-padded FFTs.
std::vector<double> LinearConvolve(std::span<const double> a,
                                   std::span<const double> b);

}  // namespace ngcc

#endif  // NGCC_SIGNAL_H_
