// SPDX-License-Identifier: Apache-2.0
//
// Inefficiency (integrated autocorrelation time) estimation from a scalar
// series: IF = 1 + 2 sum_{n >= 1} phi_n.
#pragma once

#include <string_view>
#include <vector>

namespace pmtune {

enum class IfMethod { initial_sequence, batch_means };

std::string_view if_method_name(IfMethod m);

struct IfEstimate {
  double value = 1.0;
  double se = 0.0;
  IfMethod method = IfMethod::initial_sequence;
  int lags = 0;          // lags summed, or batch length for batch means
  bool flagged = false;  // value < 1 - 2 se
};

// Geyer's initial monotone positive sequence estimator (reversible chains).
IfEstimate if_initial_sequence(const std::vector<double>& x);
// Non-overlapping batch means; batch_length 0 picks floor(sqrt(n)).
IfEstimate if_batch_means(const std::vector<double>& x, int batch_length = 0);

IfEstimate estimate_if(const std::vector<double>& x, IfMethod method = IfMethod::initial_sequence);

// Autocovariances at lags 0..max_lag, normalized by n.
std::vector<double> autocovariance(const std::vector<double>& x, int max_lag);

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;  // sqrt(var * IF / n)
  double if_value = 1.0;
};

MeanEstimate mean_with_se(const std::vector<double>& x);

}  // namespace pmtune
