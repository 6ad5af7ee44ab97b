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

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>

#include "ngcc/error.h"
#include "ngcc/nn/layers.h"
#include "ngcc/parallel.h"
#include "ngcc/signal.h"

namespace ngcc::nn {
namespace {

constexpr double kPi = std::numbers::pi;

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Transforms two real rows with one complex FFT.
void FftPair(std::span<const double> a, std::span<const double> b,
             std::vector<Complex>& fa, std::vector<Complex>& fb) {
  const std::size_t n = a.size();
  std::vector<Complex> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = Complex(a[i], b.empty() ? 0.0 : b[i]);
  Fft(z);
  fa.resize(n);
  fb.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex zk = z[k];
    const Complex zr = std::conj(z[(n - k) % n]);
    fa[k] = 0.5 * (zk + zr);
    fb[k] = Complex(0.0, -0.5) * (zk - zr);
  }
}

}  // namespace

SincConv1d::SincConv1d(std::string name, int num_filters, int kernel_length,
                       double sample_rate)
    : filters_(num_filters),
      kernel_(kernel_length),
      sample_rate_(sample_rate),
      low_hz_(name + ".low_hz", {static_cast<std::size_t>(num_filters)}),
      band_hz_(name + ".band_hz", {static_cast<std::size_t>(num_filters)}) {
  Require(num_filters > 0, ErrorKind::kInvalidArgument,
          "sinc layer needs at least one filter");
  Require(kernel_length > 0 && kernel_length % 2 == 1,
          ErrorKind::kInvalidArgument, "sinc kernel length must be odd");
  Require(sample_rate > 0.0, ErrorKind::kInvalidArgument,
          "sample rate must be positive");
  const int half = kernel_length / 2;
  window_.assign(kernel_length, 1.0);
  for (int i = 0; i <= half; ++i) {
    double w = kernel_length == 1
                   ? 1.0
                   : 0.54 - 0.46 * std::cos(2.0 * kPi * i / (kernel_length - 1));
    window_[i] = w;
    window_[kernel_length - 1 - i] = w;
  }
  InitializeMel();
}

void SincConv1d::InitializeMel() {
  const double lo = HzToMel(30.0);
  const double hi = HzToMel(sample_rate_ / 2.0 - 100.0);
  std::vector<double> edges(filters_ + 1);
  for (int i = 0; i <= filters_; ++i) {
    edges[i] = MelToHz(lo + (hi - lo) * i / filters_);
  }
  for (int f = 0; f < filters_; ++f) {
    low_hz_.value[f] = edges[f];
    band_hz_.value[f] = edges[f + 1] - edges[f];
  }
}

void SincConv1d::SetBand(int filter, double low_hz, double band_hz) {
  low_hz_.value.at(filter) = low_hz;
  band_hz_.value.at(filter) = band_hz;
}

SincConv1d::Band SincConv1d::Resolve(int filter) const {
  const double nyquist = sample_rate_ / 2.0;
  const double lp = low_hz_.value[filter];
  const double bp = band_hz_.value[filter];
  Band band{};
  band.low = std::abs(lp);
  band.dlow_dlow = lp < 0.0 ? -1.0 : 1.0;
  bool clamped = false;
  if (band.low < kMinCutoffHz || band.low > nyquist - kMinBandHz) {
    band.low = std::clamp(band.low, kMinCutoffHz, nyquist - kMinBandHz);
    band.dlow_dlow = 0.0;
    clamped = true;
  }
  band.high = band.low + std::abs(bp);
  band.dhigh_dlow = band.dlow_dlow;
  band.dhigh_dband = bp < 0.0 ? -1.0 : 1.0;
  if (band.high < band.low + kMinBandHz) {
    band.high = band.low + kMinBandHz;
    band.dhigh_dband = 0.0;
    clamped = true;
  } else if (band.high > nyquist) {
    band.high = nyquist;
    band.dhigh_dlow = 0.0;
    band.dhigh_dband = 0.0;
    clamped = true;
  }
  if (clamped) {
    ++sanitized_;
    if (!warned_) {
      warned_ = true;
      std::cerr << "warning: " << low_hz_.name
                << ": clamped a cutoff into (0, fs/2)\n";
    }
  }
  return band;
}

std::pair<double, double> SincConv1d::Cutoffs(int filter) const {
  Band b = Resolve(filter);
  return {b.low, b.high};
}

std::vector<double> SincConv1d::Kernel(int filter) const {
  const Band band = Resolve(filter);
  const int half = kernel_ / 2;
  const double fl = band.low / sample_rate_;
  const double fh = band.high / sample_rate_;
  std::vector<double> taps(kernel_);
  for (int t = 0; t <= half; ++t) {
    double v;
    if (t == 0) {
      v = 2.0 * (fh - fl);
    } else {
      v = (std::sin(2.0 * kPi * fh * t) - std::sin(2.0 * kPi * fl * t)) / (kPi * t);
    }
    v *= window_[half + t];
    taps[half + t] = v;
    taps[half - t] = v;
  }
  return taps;
}

nlohmann::json SincConv1d::Describe() const {
  return {{"kind", kind()},
          {"name", low_hz_.name.substr(0, low_hz_.name.size() - 7)},
          {"num_filters", filters_},
          {"kernel_length", kernel_},
          {"sample_rate", sample_rate_}};
}

Tensor SincConv1d::Forward(const Tensor& x, Mode) {
  const Shape s = x.shape();
  Require(s.channels == 1, ErrorKind::kShape,
          "sinc layer expects a single input channel, got " + s.ToString());
  Require(s.length >= static_cast<std::size_t>(kernel_), ErrorKind::kShape,
          "input shorter than the sinc kernel");
  Require(IsPowerOfTwo(s.length), ErrorKind::kInvalidLength,
          "sinc layer input length must be a power of two");
  const std::size_t n = s.length;
  const std::size_t half = static_cast<std::size_t>(kernel_ / 2);

  Record rec;
  rec.input_shape = s;
  rec.bands.resize(filters_);
  rec.kernel_spectra.resize(filters_);
  for (int f = 0; f < filters_; ++f) rec.bands[f] = Resolve(f);
  ParallelFor((filters_ + 1) / 2, [&](std::size_t pair) {
    const int f0 = static_cast<int>(2 * pair);
    const int f1 = f0 + 1;
    std::vector<double> k0(n, 0.0), k1;
    auto place = [&](int f, std::vector<double>& dst) {
      std::vector<double> taps = Kernel(f);
      for (std::size_t j = 0; j < taps.size(); ++j) {
        dst[(j + n - half) % n] = taps[j];
      }
    };
    place(f0, k0);
    if (f1 < filters_) {
      k1.assign(n, 0.0);
      place(f1, k1);
    }
    std::vector<Complex> s0, s1;
    FftPair(k0, k1, s0, s1);
    rec.kernel_spectra[f0] = std::move(s0);
    if (f1 < filters_) rec.kernel_spectra[f1] = std::move(s1);
  });

  rec.input_spectra.resize(s.batch);
  ParallelFor((s.batch + 1) / 2, [&](std::size_t pair) {
    const std::size_t b0 = 2 * pair, b1 = b0 + 1;
    std::vector<Complex> s0, s1;
    FftPair(x.row(b0, 0), b1 < s.batch ? x.row(b1, 0) : std::span<const double>(),
            s0, s1);
    rec.input_spectra[b0] = std::move(s0);
    if (b1 < s.batch) rec.input_spectra[b1] = std::move(s1);
  });

  // out[b][f] = IFFT(X_b conj(K_f)); two real outputs per complex inverse.
  Tensor out({s.batch, static_cast<std::size_t>(filters_), n});
  const std::size_t pairs = static_cast<std::size_t>((filters_ + 1) / 2);
  const double scale = 1.0 / static_cast<double>(n);
  ParallelFor(s.batch * pairs, [&](std::size_t r) {
    const std::size_t b = r / pairs;
    const int f0 = static_cast<int>(2 * (r % pairs));
    const int f1 = f0 + 1;
    const auto& xs = rec.input_spectra[b];
    const auto& k0 = rec.kernel_spectra[f0];
    std::vector<Complex> z(n);
    if (f1 < filters_) {
      const auto& k1 = rec.kernel_spectra[f1];
      for (std::size_t k = 0; k < n; ++k) {
        z[k] = xs[k] * std::conj(k0[k]) + Complex(0.0, 1.0) * (xs[k] * std::conj(k1[k]));
      }
    } else {
      for (std::size_t k = 0; k < n; ++k) z[k] = xs[k] * std::conj(k0[k]);
    }
    InverseFftUnnormalized(z);
    auto y0 = out.row(b, f0);
    for (std::size_t i = 0; i < n; ++i) y0[i] = z[i].real() * scale;
    if (f1 < filters_) {
      auto y1 = out.row(b, f1);
      for (std::size_t i = 0; i < n; ++i) y1[i] = z[i].imag() * scale;
    }
  });
  record_ = std::move(rec);
  return out;
}

Tensor SincConv1d::Backward(const Tensor& grad_out) {
  RequireGraph(record_.has_value());
  Record rec = std::move(*record_);
  record_.reset();
  const Shape s = rec.input_shape;
  const std::size_t n = s.length;
  const std::size_t half = static_cast<std::size_t>(kernel_ / 2);
  Require(grad_out.shape() ==
              Shape{s.batch, static_cast<std::size_t>(filters_), n},
          ErrorKind::kShape, "sinc gradient shape mismatch");

  // Spectra of every gradient row, two rows per transform.
  const std::size_t rows = s.batch * filters_;
  std::vector<std::vector<Complex>> gspec(rows);
  ParallelFor((rows + 1) / 2, [&](std::size_t pair) {
    const std::size_t r0 = 2 * pair, r1 = r0 + 1;
    auto row_of = [&](std::size_t r) {
      return grad_out.row(r / filters_, r % filters_);
    };
    std::vector<Complex> s0, s1;
    FftPair(row_of(r0), r1 < rows ? row_of(r1) : std::span<const double>(), s0, s1);
    gspec[r0] = std::move(s0);
    if (r1 < rows) gspec[r1] = std::move(s1);
  });

  // dK_f[j] = c_f[(j - half) mod N], C_f = sum_b conj(G_bf) X_b.
  std::vector<double> dlow(filters_, 0.0), dband(filters_, 0.0);
  ParallelFor(static_cast<std::size_t>(filters_), [&](std::size_t f) {
    std::vector<Complex> c(n, Complex(0.0, 0.0));
    for (std::size_t b = 0; b < s.batch; ++b) {
      const auto& g = gspec[b * filters_ + f];
      const auto& xs = rec.input_spectra[b];
      for (std::size_t k = 0; k < n; ++k) c[k] += std::conj(g[k]) * xs[k];
    }
    InverseFftUnnormalized(c);
    const double scale = 1.0 / static_cast<double>(n);
    const Band& band = rec.bands[f];
    const double fl = band.low / sample_rate_;
    const double fh = band.high / sample_rate_;
    double d_fl = 0.0, d_fh = 0.0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(kernel_); ++j) {
      const double gk = c[(j + n - half) % n].real() * scale;
      const double t = static_cast<double>(j) - static_cast<double>(half);
      const double w = window_[j];
      d_fh += gk * w * 2.0 * std::cos(2.0 * kPi * fh * t);
      d_fl -= gk * w * 2.0 * std::cos(2.0 * kPi * fl * t);
    }
    // Cutoffs enter the kernel as hz / fs.
    d_fl /= sample_rate_;
    d_fh /= sample_rate_;
    dlow[f] = d_fl * band.dlow_dlow + d_fh * band.dhigh_dlow;
    dband[f] = d_fh * band.dhigh_dband;
  });
  for (int f = 0; f < filters_; ++f) {
    low_hz_.grad[f] += dlow[f];
    band_hz_.grad[f] += dband[f];
  }

  if (!needs_input_grad_) return Tensor();
  Tensor grad_in(s);
  ParallelFor(s.batch, [&](std::size_t b) {
    std::vector<Complex> acc(n, Complex(0.0, 0.0));
    for (int f = 0; f < filters_; ++f) {
      const auto& g = gspec[b * filters_ + f];
      const auto& kf = rec.kernel_spectra[f];
      for (std::size_t k = 0; k < n; ++k) acc[k] += g[k] * kf[k];
    }
    InverseFftUnnormalized(acc);
    auto dst = grad_in.row(b, 0);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) dst[i] = acc[i].real() * scale;
  });
  return grad_in;
}

}  // namespace ngcc::nn
