// SPDX-License-Identifier: Apache-2.0
//
// Noise calibration: sigma(theta; N) from replicated filters, choice of N for
// a target sigma, and moment diagnostics for Z = log p-hat - log p.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rng.hpp"
#include "ssm.hpp"

namespace pmtune {

// One likelihood estimate with N particles at a fixed parameter value.
using LogLikSampler = std::function<LogLikEstimate(int particles, Rng& rng)>;

struct ZDiagnostics {
  std::size_t n = 0;
  double sigma = 0.0;  // sigma used for the expected moments
  double mean = 0.0, var = 0.0, m3 = 0.0, m4 = 0.0;
  double se_mean = 0.0, se_var = 0.0, se_m3 = 0.0, se_m4 = 0.0;
  // Standardized discrepancies from N(-sigma^2/2, sigma^2).
  double d_mean = 0.0, d_var = 0.0, d_m3 = 0.0, d_m4 = 0.0;
  // (var + 2 mean) / se: zero for a log-normal likelihood estimate.
  double d_shift = 0.0;
};

// sigma <= 0 uses the sample standard deviation. With estimated_reference the
// z values are taken against the log of the mean of exp(log p-hat), and the
// SE of d_shift includes the variability of that reference.
ZDiagnostics z_diagnostics(const std::vector<double>& z, double sigma = 0.0, bool estimated_reference = false);

struct CalibrationRow {
  int particles = 0;
  double sigma_hat = 0.0;
  double se = 0.0;
  ZDiagnostics moments;
  int replications = 0;
  int degenerate = 0;
  std::vector<double> z;
};

// S filter runs with derived seeds. Z is taken against `exact` when given,
// otherwise against the log of the mean of the S estimates.
CalibrationRow estimate_sigma(const LogLikSampler& sampler, int particles, int replications, std::uint64_t seed,
                              std::optional<double> exact = std::nullopt, unsigned workers = 1);

struct NChoice {
  double c = 0.0;          // sigma^2 ~ c / N with the slope fixed at -1
  double slope = 0.0;      // free log-log slope
  double r_squared = 0.0;  // of the free fit
  int n_star = 0;
  bool poor_fit = false;   // R^2 < 0.9
  std::vector<CalibrationRow> pilot;
  std::optional<CalibrationRow> confirmation;
};

// Fit of sigma^2 = c / N on given pilot values; no sampling.
NChoice fit_n_choice(const std::vector<int>& particles, const std::vector<double>& sigma2, double sigma_target);

// Five log-spaced pilot N values in [n_lo, n_hi], a fit, and a confirmation run at N*.
NChoice choose_n(const LogLikSampler& sampler, double sigma_target, int n_lo, int n_hi, int replications,
                 std::uint64_t seed, std::optional<double> exact = std::nullopt, unsigned workers = 1);

// R^2 of the least-squares line through (x, y).
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);
// Linear fit of 1/sigma^2 against N; returns R^2.
double inverse_variance_r2(const std::vector<int>& particles, const std::vector<double>& sigma);
// Linear fit of sigma^2 against 1/N; returns R^2.
double variance_vs_inverse_n_r2(const std::vector<int>& particles, const std::vector<double>& sigma);

struct TiltedSample {
  std::vector<double> z;
  double acceptance = 0.0;
};

// Independence MH on the empirical support targeting exp(z) g_N(z).
TiltedSample tilted_sample(const std::vector<double>& z_from_g, std::size_t n, std::uint64_t seed);

void write_calibration_csv(const std::vector<CalibrationRow>& rows, std::ostream& out);

}  // namespace pmtune
