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

#include "ngcc/gcc.h"

#include <cmath>
#include <cstdlib>
#include <string>

#include "ngcc/error.h"

namespace ngcc {

Weighting Weighting::BetaPhat(double beta) {
  Require(beta >= 0.0 && beta <= 1.0, ErrorKind::kInvalidArgument,
          "beta must lie in [0, 1]");
  return Weighting(Kind::kBetaPhat, beta);
}

Weighting Weighting::Parse(const std::string& text) {
  if (text == "none" || text == "unweighted") return Unweighted();
  if (text == "phat") return Phat();
  if (text.rfind("beta:", 0) == 0) {
    const std::string value = text.substr(5);
    char* end = nullptr;
    double beta = std::strtod(value.c_str(), &end);
    Require(!value.empty() && end && *end == '\0', ErrorKind::kConfig,
            "cannot parse beta in weighting '" + text + "'");
    Require(beta >= 0.0 && beta <= 1.0, ErrorKind::kConfig,
            "beta must lie in [0, 1]");
    return BetaPhat(beta);
  }
  throw Error(ErrorKind::kConfig, "unknown weighting '" + text +
                                      "' (expected none, phat or beta:<b>)");
}

std::string Weighting::ToString() const {
  switch (kind_) {
    case Kind::kUnweighted: return "none";
    case Kind::kPhat: return "phat";
    case Kind::kBetaPhat: return "beta:" + std::to_string(beta_);
  }
  return "?";
}

CorrelationWindow::CorrelationWindow(std::vector<double> values, int max_lag)
    : values_(std::move(values)), max_lag_(max_lag) {
  Require(max_lag_ >= 0 &&
              values_.size() == static_cast<std::size_t>(2 * max_lag_ + 1),
          ErrorKind::kShape, "correlation window must hold 2*max_lag+1 values");
}

int MaxLag(double mic_distance, double sample_rate, double speed_of_sound) {
  Require(mic_distance > 0.0 && sample_rate > 0.0 && speed_of_sound > 0.0,
          ErrorKind::kInvalidArgument,
          "distance, sample rate and speed of sound must be positive");
  return static_cast<int>(std::floor(mic_distance * sample_rate / speed_of_sound));
}

std::vector<Complex> WeightedCrossSpectrum(std::span<const Complex> x1,
                                           std::span<const Complex> x2,
                                           const Weighting& weighting) {
  Require(x1.size() == x2.size(), ErrorKind::kShape,
          "spectra have different lengths");
  const std::size_t n = x1.size();
  std::vector<Complex> cross(n);
  std::vector<double> mag(n);
  double max_mag = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cross[k] = x1[k] * std::conj(x2[k]);
    mag[k] = std::abs(cross[k]);
    max_mag = std::max(max_mag, mag[k]);
  }
  const double beta = weighting.beta();
  if (beta == 0.0) return cross;
  const double floor = kPhatGuard * max_mag;
  for (std::size_t k = 0; k < n; ++k) {
    if (mag[k] <= floor || mag[k] == 0.0) {
      cross[k] = 0.0;
    } else if (beta == 1.0) {
      cross[k] /= mag[k];
    } else {
      cross[k] /= std::pow(mag[k], beta);
    }
  }
  return cross;
}

CorrelationWindow Gcc(const Frame& x1, const Frame& x2,
                      const Weighting& weighting, int max_lag) {
  Require(x1.size() == x2.size(), ErrorKind::kShape,
          "frames have different lengths");
  Require(x1.sample_rate() == x2.sample_rate(), ErrorKind::kShape,
          "frames have different sample rates");
  const long n = static_cast<long>(x1.size());
  Require(max_lag >= 0 && 2L * max_lag < n, ErrorKind::kInvalidArgument,
          "max_lag must satisfy 0 <= max_lag < N/2");
  Spectrum s1 = Dft(x1);
  Spectrum s2 = Dft(x2);
  std::vector<Complex> cross = WeightedCrossSpectrum(s1.bins, s2.bins, weighting);
  InverseFftUnnormalized(cross);
  std::vector<double> values(2 * max_lag + 1);
  // Equivalent to weighting the per-sample cross-power X1 X2* / N.
  const double scale = std::pow(static_cast<double>(n), weighting.beta() - 2.0);
  for (int m = -max_lag; m <= max_lag; ++m) {
    long idx = m < 0 ? n + m : m;
    values[m + max_lag] = cross[idx].real() * scale;
  }
  return CorrelationWindow(std::move(values), max_lag);
}

int ArgmaxLag(std::span<const double> values, int max_lag) {
  Require(!values.empty(), ErrorKind::kInvalidData, "empty correlation window");
  Require(values.size() == static_cast<std::size_t>(2 * max_lag + 1),
          ErrorKind::kShape, "window length does not match max_lag");
  for (double v : values) {
    Require(!std::isnan(v), ErrorKind::kInvalidData,
            "correlation window contains NaN");
  }
  // Visit lags in tie-break order 0, -1, 1, -2, 2, ... and keep the first
  // strict maximum.
  int best = 0;
  double best_value = values[max_lag];
  for (int d = 1; d <= max_lag; ++d) {
    for (int lag : {-d, d}) {
      double v = values[lag + max_lag];
      if (v > best_value) {
        best_value = v;
        best = lag;
      }
    }
  }
  return best;
}

int EstimateDelay(const CorrelationWindow& window) {
  return ArgmaxLag(window.values(), window.max_lag());
}

}  // namespace ngcc
