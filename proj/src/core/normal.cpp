// SPDX-License-Identifier: Apache-2.0
#include "normal.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace pmtune {

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_pdf(double x, double mean, double sd) { return norm_pdf((x - mean) / sd) / sd; }

double norm_log_pdf(double x, double mean, double sd) {
  const double u = (x - mean) / sd;
  return -0.5 * u * u - kLogSqrt2Pi - std::log(sd);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

double log_norm_cdf(double x) {
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x * 0.70710678118654752440));
  if (x >= -8.0) return std::log(norm_cdf(x));
  if (x == -std::numeric_limits<double>::infinity()) return x;
  // Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...), summed until the
  // terms stop shrinking.
  const double inv2 = 1.0 / (x * x);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = -term * (2.0 * k - 1.0) * inv2;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
  }
  return -0.5 * x * x - kLogSqrt2Pi - std::log(-x) + std::log(sum);
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace pmtune
