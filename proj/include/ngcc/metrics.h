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

#ifndef NGCC_METRICS_H_
#define NGCC_METRICS_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ngcc {

// |estimate - truth| * c / fs * 100.
double DelayErrorCm(int estimate, int truth, double sample_rate, double speed_of_sound);

// Thresholds (cm) reported by default; 10 cm is the headline accuracy.
const std::vector<double>& DefaultThresholdsCm();

struct Condition {
  double snr_db = 0.0;
  double t60_s = 0.0;
};

struct MetricsReport {
  double mae_cm = 0.0;
  double rmse_cm = 0.0;
  // Fraction of estimates with error strictly below each threshold.
  std::map<double, double> acc_at;
  // Fraction of estimates equal to the true lag.
  double exact = 0.0;
  std::size_t n_examples = 0;
  std::optional<Condition> condition;
};

MetricsReport ComputeMetrics(std::span<const int> estimates, std::span<const int> truth,
                             const std::vector<double>& thresholds_cm,
                             double sample_rate, double speed_of_sound);

// Checks acc in [0, 1], monotone in the threshold, and rmse >= mae.
// Returns an empty string when consistent, otherwise a description.
std::string CheckReport(const MetricsReport& report);

}  // namespace ngcc

#endif  // NGCC_METRICS_H_
