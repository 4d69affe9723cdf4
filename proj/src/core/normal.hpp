// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace pmtune {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double norm_pdf(double x);
double norm_pdf(double x, double mean, double sd);
double norm_log_pdf(double x, double mean, double sd);
double norm_cdf(double x);

// log Phi(x), accurate in both tails. Uses the asymptotic Mills-ratio series
// below x = -8.
double log_norm_cdf(double x);

// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b);

}  // namespace pmtune
