// SPDX-License-Identifier: Apache-2.0
//
// z-marginal quantities under Gaussian log-likelihood noise
// Z ~ N(-sigma^2/2, sigma^2) and its tilted law N(sigma^2/2, sigma^2).
#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "rng.hpp"

namespace pmtune {

// The four noise functionals consumed by the bound formulas. Any noise law with
// E[exp(Z)] = 1 can be described this way.
struct NoiseFunctionals {
  double sigma = 0.0;
  double mean_accept = 1.0;  // pi_z(rho_z)
  double inv_accept = 1.0;   // pi_z(1/rho_z)
  double phi1 = 0.0;         // lag-1 autocorrelation of 1/rho_z under the jump kernel
  double if_z = 1.0;         // IF(1/rho_z, jump kernel)
};

double noise_density(double sigma, double z);
double tilted_density(double sigma, double z);
double accept_rate_z(double sigma, double z);
double mean_accept_z(double sigma);
double mean_accept_z_quadrature(double sigma);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  double widened_value = 0.0;  // same integral over a wider range, for the truncation check
};

QuadratureResult inv_accept_quadrature(double sigma);
double inv_accept_integral(double sigma);

double sample_noise(double sigma, Rng& rng);
double sample_tilted(double sigma, Rng& rng);
// One draw from the jump kernel of the z-chain started at z.
double sample_jump_z(double sigma, double z, Rng& rng);
// One draw from the jump chain's stationary law, by rejection from the tilted law.
double sample_jump_stationary(double sigma, Rng& rng);

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

McEstimate estimate_phi_n(double sigma, int n, std::size_t samples, Rng& rng);

struct PhiSequence {
  std::vector<double> phi;
  std::vector<double> se;
};

// Lags 0..max_lag from a single pass of `samples` chains.
PhiSequence estimate_phi_sequence(double sigma, int max_lag, std::size_t samples, Rng& rng);

struct IfZEstimate {
  double value = 1.0;
  double se = 0.0;
  double phi1 = 0.0;
  double phi1_se = 0.0;
  int lags = 0;
};

IfZEstimate estimate_if_z(double sigma, std::size_t samples, int cutoff, Rng& rng);

struct NoiseLawTable {
  std::vector<double> grid;
  std::vector<double> inv_accept;
  std::vector<double> phi1;
  std::vector<double> if_z;
  std::size_t mc_samples = 0;
  int cutoff = 0;
  std::uint64_t seed = 0;
};

NoiseLawTable build_table(const std::vector<double>& grid, std::size_t samples, int cutoff, std::uint64_t seed,
                          unsigned workers = 1);
void write_table_csv(const NoiseLawTable& table, std::ostream& out);

// Deterministic route: A in closed form, pi_z(1/rho_z) by quadrature, and the
// jump-kernel quantities from a Richardson-extrapolated grid discretization.
NoiseFunctionals gaussian_functionals(double sigma);

}  // namespace pmtune
