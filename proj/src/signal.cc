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

#include "ngcc/signal.h"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "ngcc/error.h"

namespace ngcc {
namespace {

// Twiddles and bit-reversal table for one transform size. Built once per
// size and shared read-only between threads.
struct FftPlan {
  explicit FftPlan(std::size_t n) : n(n), twiddle(n / 2), reversed(n) {
    for (std::size_t k = 0; k < n / 2; ++k) {
      double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                     static_cast<double>(n);
      twiddle[k] = Complex(std::cos(angle), std::sin(angle));
    }
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) {
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      }
      reversed[i] = r;
    }
  }

  std::size_t n;
  std::vector<Complex> twiddle;
  std::vector<std::size_t> reversed;
};

const FftPlan& PlanFor(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<FftPlan>> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = plans[n];
  if (!slot) slot = std::make_unique<FftPlan>(n);
  return *slot;
}

void Transform(std::span<Complex> data, bool inverse) {
  const std::size_t n = data.size();
  Require(IsPowerOfTwo(n), ErrorKind::kInvalidLength,
          "transform length " + std::to_string(n) + " is not a power of two");
  if (n == 1) return;
  const FftPlan& plan = PlanFor(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = plan.reversed[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  // Butterflies on raw doubles; std::complex multiplication carries NaN
  // recovery branches that are not needed here.
  double* d = reinterpret_cast<double*>(data.data());
  const double* tw = reinterpret_cast<const double*>(plan.twiddle.data());
  const double sign = inverse ? -1.0 : 1.0;
  for (std::size_t half = 1; half < n; half <<= 1) {
    const std::size_t stride = n / (2 * half);
    for (std::size_t start = 0; start < n; start += 2 * half) {
      for (std::size_t k = 0; k < half; ++k) {
        const double wr = tw[2 * k * stride];
        const double wi = sign * tw[2 * k * stride + 1];
        double* a = d + 2 * (start + k);
        double* b = d + 2 * (start + k + half);
        const double br = b[0] * wr - b[1] * wi;
        const double bi = b[0] * wi + b[1] * wr;
        b[0] = a[0] - br;
        b[1] = a[1] - bi;
        a[0] += br;
        a[1] += bi;
      }
    }
  }
}

}  // namespace

bool IsPowerOfTwo(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Frame::Frame(std::vector<double> samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  Require(IsPowerOfTwo(samples_.size()), ErrorKind::kInvalidLength,
          "frame length " + std::to_string(samples_.size()) +
              " is not a power of two");
  Require(sample_rate_ > 0.0, ErrorKind::kInvalidArgument,
          "sample rate must be positive");
  for (double v : samples_) {
    Require(std::isfinite(v), ErrorKind::kInvalidData,
            "frame contains a non-finite sample");
  }
}

void Fft(std::span<Complex> data) { Transform(data, false); }

void InverseFftUnnormalized(std::span<Complex> data) { Transform(data, true); }

Spectrum Dft(const Frame& frame) {
  Spectrum out;
  out.sample_rate = frame.sample_rate();
  out.bins.assign(frame.samples().begin(), frame.samples().end());
  Fft(out.bins);
  return out;
}

Frame Idft(const Spectrum& spectrum) {
  std::vector<Complex> work = spectrum.bins;
  InverseFftUnnormalized(work);
  const double scale = 1.0 / static_cast<double>(work.size());
  std::vector<double> real(work.size());
  double norm2 = 0.0;
  double max_imag = 0.0;
  for (std::size_t i = 0; i < work.size(); ++i) {
    real[i] = work[i].real() * scale;
    norm2 += real[i] * real[i];
    max_imag = std::max(max_imag, std::abs(work[i].imag() * scale));
  }
  Require(max_imag <= 1e-6 * std::sqrt(norm2), ErrorKind::kConjugateSymmetry,
          "inverse transform has an imaginary residue of " +
              std::to_string(max_imag));
  return Frame(std::move(real), spectrum.sample_rate);
}

std::vector<double> CircularShift(std::span<const double> x, long shift) {
  const long n = static_cast<long>(x.size());
  std::vector<double> out(x.size());
  if (n == 0) return out;
  long s = shift % n;
  if (s < 0) s += n;
  for (long i = 0; i < n; ++i) out[(i + s) % n] = x[i];
  return out;
}

Frame CircularShift(const Frame& frame, long shift) {
  return Frame(CircularShift(frame.samples(), shift), frame.sample_rate());
}

double FractionalDelayKernel::At(long offset) const {
  long i = offset - first_offset;
  if (i < 0 || i >= static_cast<long>(taps.size())) return 0.0;
  return taps[i];
}

FractionalDelayKernel MakeFractionalDelayKernel(double delay, int length) {
  Require(length >= 9 && length % 2 == 1, ErrorKind::kInvalidLength,
          "fractional delay kernel length must be odd and at least 9");
  Require(std::isfinite(delay), ErrorKind::kInvalidArgument,
          "delay must be finite");
  const long half = length / 2;
  const double whole = std::floor(delay);
  const double frac = delay - whole;
  FractionalDelayKernel kernel;
  kernel.first_offset = static_cast<long>(whole) - half;
  kernel.taps.resize(length);
  // sin(pi*(k - frac)) = -(-1)^k sin(pi*frac), exact zeros for integer delays.
  const double sin_frac = std::sin(std::numbers::pi * frac);
  for (long k = -half; k <= half; ++k) {
    const double t = static_cast<double>(k) - frac;
    double sinc = 1.0;
    if (t != 0.0) {
      const double sign = (k % 2 == 0) ? -1.0 : 1.0;
      sinc = sign * sin_frac / (std::numbers::pi * t);
    }
    const double window =
        0.5 * (1.0 + std::cos(std::numbers::pi * t / static_cast<double>(half + 1)));
    kernel.taps[k + half] = sinc * window;
  }
  return kernel;
}

std::vector<double> LinearConvolve(std::span<const double> a,
                                   std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = NextPowerOfTwo(out_len);
  std::vector<Complex> fa(n), fb(n);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  Fft(fa);
  Fft(fb);
  for (std::size_t k = 0; k < n; ++k) fa[k] *= fb[k];
  InverseFftUnnormalized(fa);
  std::vector<double> out(out_len);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real() * scale;
  return out;
}

}  // namespace ngcc
