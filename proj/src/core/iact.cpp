// SPDX-License-Identifier: Apache-2.0
#include "iact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace pmtune {
namespace {

constexpr std::size_t kMinLength = 100;

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

void check_series(const std::vector<double>& x) {
  require(x.size() >= kMinLength, ErrorCode::domain, "estimate_if needs at least 100 values");
  for (double v : x) require(std::isfinite(v), ErrorCode::domain, "estimate_if: non-finite value in series");
}

double lag_cov(const std::vector<double>& x, double m, std::size_t k) {
  const std::size_t n = x.size();
  double s = 0.0;
  for (std::size_t t = 0; t + k < n; ++t) s += (x[t] - m) * (x[t + k] - m);
  return s / static_cast<double>(n);
}

void flag(IfEstimate& e) { e.flagged = e.value < 1.0 - 2.0 * e.se; }

}  // namespace

std::string_view if_method_name(IfMethod m) {
  return m == IfMethod::initial_sequence ? "initial_sequence" : "batch_means";
}

std::vector<double> autocovariance(const std::vector<double>& x, int max_lag) {
  require(!x.empty() && max_lag >= 0, ErrorCode::domain, "autocovariance: empty series or negative lag");
  const double m = mean_of(x);
  const int top = std::min<int>(max_lag, static_cast<int>(x.size()) - 1);
  std::vector<double> out(static_cast<std::size_t>(top) + 1);
  for (int k = 0; k <= top; ++k) out[static_cast<std::size_t>(k)] = lag_cov(x, m, static_cast<std::size_t>(k));
  return out;
}

IfEstimate if_initial_sequence(const std::vector<double>& x) {
  check_series(x);
  const std::size_t n = x.size();
  const double m = mean_of(x);
  const double g0 = lag_cov(x, m, 0);
  require(g0 > 0.0, ErrorCode::domain, "estimate_if: series is constant");
  // Gamma_k = gamma_{2k} + gamma_{2k+1}; stop at the first non-positive pair
  // and force the retained pairs to be non-increasing.
  double sum = 0.0, prev = std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  for (; 2 * k + 1 < n; ++k) {
    const double pair = (k == 0 ? g0 : lag_cov(x, m, 2 * k)) + lag_cov(x, m, 2 * k + 1);
    if (pair <= 0.0) break;
    prev = std::min(prev, pair);
    sum += prev;
  }
  IfEstimate e;
  e.method = IfMethod::initial_sequence;
  e.value = (2.0 * sum - g0) / g0;
  e.lags = static_cast<int>(2 * k);
  // Sokal's window approximation: var(IF) ~ 2 (2W + 1) IF^2 / n.
  e.se = e.value * std::sqrt(2.0 * (2.0 * e.lags + 1.0) / static_cast<double>(n));
  flag(e);
  return e;
}

IfEstimate if_batch_means(const std::vector<double>& x, int batch_length) {
  check_series(x);
  const std::size_t n = x.size();
  const std::size_t b =
      batch_length > 0 ? static_cast<std::size_t>(batch_length) : static_cast<std::size_t>(std::sqrt(double(n)));
  const std::size_t nb = n / b;
  require(nb >= 2, ErrorCode::domain, "batch means needs at least two batches");
  const double m = mean_of(x);
  const double g0 = lag_cov(x, m, 0);
  require(g0 > 0.0, ErrorCode::domain, "estimate_if: series is constant");
  double grand = 0.0;
  std::vector<double> means(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    double s = 0.0;
    for (std::size_t t = j * b; t < (j + 1) * b; ++t) s += x[t];
    means[j] = s / static_cast<double>(b);
    grand += means[j];
  }
  grand /= static_cast<double>(nb);
  double ss = 0.0;
  for (double v : means) ss += (v - grand) * (v - grand);
  const double var_batch = ss / static_cast<double>(nb - 1);
  IfEstimate e;
  e.method = IfMethod::batch_means;
  e.value = static_cast<double>(b) * var_batch / g0;
  e.se = e.value * std::sqrt(2.0 / static_cast<double>(nb - 1));
  e.lags = static_cast<int>(b);
  flag(e);
  return e;
}

IfEstimate estimate_if(const std::vector<double>& x, IfMethod method) {
  return method == IfMethod::initial_sequence ? if_initial_sequence(x) : if_batch_means(x);
}

MeanEstimate mean_with_se(const std::vector<double>& x) {
  MeanEstimate r;
  r.mean = mean_of(x);
  const IfEstimate e = if_initial_sequence(x);
  r.if_value = std::max(e.value, 1e-12);
  r.se = std::sqrt(lag_cov(x, r.mean, 0) * r.if_value / static_cast<double>(x.size()));
  return r;
}

}  // namespace pmtune
