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

#ifndef NGCC_GCC_H_
#define NGCC_GCC_H_

#include <span>
#include <string>
#include <vector>

#include "ngcc/signal.h"

namespace ngcc {

// Bins whose cross-power magnitude falls below this fraction of the largest
// bin are dropped under PHAT-style weightings instead of being divided by ~0.
inline constexpr double kPhatGuard = 1e-24;

// GCC frequency weighting. BetaPhat(beta) is 1/|X1 X2*|^beta, so beta = 1 is
// PHAT and beta = 0 is the plain cross-correlation.
class Weighting {
 public:
  enum class Kind { kUnweighted, kPhat, kBetaPhat };

  static Weighting Unweighted() { return Weighting(Kind::kUnweighted, 0.0); }
  static Weighting Phat() { return Weighting(Kind::kPhat, 1.0); }
  static Weighting BetaPhat(double beta);

  // Accepts "none", "phat" or "beta:<value>".
  static Weighting Parse(const std::string& text);

  Kind kind() const { return kind_; }
  // Effective exponent: 0 for unweighted, 1 for PHAT.
  double beta() const { return beta_; }
  std::string ToString() const;

 private:
  Weighting(Kind kind, double beta) : kind_(kind), beta_(beta) {}

  Kind kind_;
  double beta_;
};

// GCC values over integer lags -max_lag .. max_lag.
class CorrelationWindow {
 public:
  CorrelationWindow(std::vector<double> values, int max_lag);

  int max_lag() const { return max_lag_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double at(int lag) const { return values_[lag + max_lag_]; }

 private:
  std::vector<double> values_;
  int max_lag_;
};

// floor(distance * sample_rate / speed_of_sound).
int MaxLag(double mic_distance, double sample_rate, double speed_of_sound);

// Weighted cross-power spectrum X1[k] X2*[k] phi[k].
std::vector<Complex> WeightedCrossSpectrum(std::span<const Complex> x1,
                                           std::span<const Complex> x2,
                                           const Weighting& weighting);

// Full-length circular GCC of the per-sample cross-power X1 X2* / N, read
// out at lags -max_lag..max_lag (negative lags from the wrapped end).
// Unweighted, R[m] = (1/N) sum_n x1[n] x2[(n - m) mod N]; with PHAT a
// circularly shifted copy gives a unit pulse.
CorrelationWindow Gcc(const Frame& x1, const Frame& x2,
                      const Weighting& weighting, int max_lag);

// Argmax lag. Ties go to the smallest |lag|, then to the negative lag.
int EstimateDelay(const CorrelationWindow& window);
int ArgmaxLag(std::span<const double> values, int max_lag);

}  // namespace ngcc

#endif  // NGCC_GCC_H_
