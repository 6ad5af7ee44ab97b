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

#include "ngcc/metrics.h"

#include <cmath>
#include <cstdlib>

#include "ngcc/error.h"

namespace ngcc {

double DelayErrorCm(int estimate, int truth, double sample_rate, double speed_of_sound) {
  Require(sample_rate > 0.0 && speed_of_sound > 0.0, ErrorKind::kInvalidArgument,
          "sample rate and speed of sound must be positive");
  return std::abs(estimate - truth) * speed_of_sound / sample_rate * 100.0;
}

const std::vector<double>& DefaultThresholdsCm() {
  static const std::vector<double> kThresholds = {2.5, 5.0,  7.5,  10.0, 15.0,
                                                  20.0, 30.0, 50.0, 100.0};
  return kThresholds;
}

MetricsReport ComputeMetrics(std::span<const int> estimates, std::span<const int> truth,
                             const std::vector<double>& thresholds_cm,
                             double sample_rate, double speed_of_sound) {
  Require(estimates.size() == truth.size(), ErrorKind::kShape,
          "estimate and truth counts differ");
  Require(!estimates.empty(), ErrorKind::kInvalidArgument, "no estimates to score");
  MetricsReport r;
  r.n_examples = estimates.size();
  std::map<double, std::size_t> hits;
  for (double t : thresholds_cm) hits[t] = 0;
  double abs_sum = 0.0, sq_sum = 0.0;
  std::size_t exact = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double e = DelayErrorCm(estimates[i], truth[i], sample_rate, speed_of_sound);
    abs_sum += e;
    sq_sum += e * e;
    if (estimates[i] == truth[i]) ++exact;
    for (auto& [t, count] : hits) {
      if (e < t) ++count;
    }
  }
  const double n = static_cast<double>(r.n_examples);
  r.mae_cm = abs_sum / n;
  r.rmse_cm = std::sqrt(sq_sum / n);
  r.exact = static_cast<double>(exact) / n;
  for (const auto& [t, count] : hits) r.acc_at[t] = static_cast<double>(count) / n;
  return r;
}

std::string CheckReport(const MetricsReport& report) {
  if (report.rmse_cm < report.mae_cm * (1.0 - 1e-12)) return "rmse below mae";
  double previous = 0.0;
  for (const auto& [t, acc] : report.acc_at) {
    if (acc < 0.0 || acc > 1.0) return "accuracy outside [0, 1]";
    if (acc < previous) return "accuracy decreases with a larger threshold";
    previous = acc;
  }
  return "";
}

}  // namespace ngcc
