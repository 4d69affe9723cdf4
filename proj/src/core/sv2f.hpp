// SPDX-License-Identifier: Apache-2.0
//
// Two-factor stochastic volatility model on an Euler grid:
//   dlog P = mu_y dt + sexp{(v1 + beta2 v2)/2} dB,
//   dv1 = -k1 (v1 - mu1) dt + sigma1 dW1,  dv2 = -k2 v2 dt + (1 + beta12 v2) dW2,
// with corr(B, W1) = phi1 and corr(B, W2) = phi2.
#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"
#include "ssm.hpp"

namespace pmtune {

struct Sv2fModel {
  double k1 = 0.02, mu1 = -0.5, sigma1 = 0.15;
  double k2 = 1.0, beta12 = 0.1, beta2 = 0.5;
  double mu_y = 0.03, phi1 = -0.3, phi2 = -0.2;
  double delta_obs = 1.0;  // Delta, spacing of observations
  int substeps = 2;        // M, so the Euler step is Delta / M
  double splice = 5.0;     // sexp threshold x0

  void validate() const;
  // dB = a1 dW1 + a2 dW2 + sqrt(b) dBbar, which needs corr(W1, W2) = phi1 phi2.
  double a1() const;
  double a2() const;
  double b() const;
  double w_corr() const { return phi1 * phi2; }
};

inline constexpr int kSv2fParams = 9;

// exp(x) up to x0, then exp(x0) sqrt(1 + 2 (x - x0)): continuous with a
// continuous first derivative and square-root growth beyond the splice.
double sexp(double x, double x0);

// Unconstrained psi: log k1, mu1, log sigma1, log k2, beta12, beta2, mu_y, atanh phi1, atanh phi2.
Eigen::VectorXd sv2f_to_psi(const Sv2fModel& m);
Sv2fModel sv2f_from_psi(const Eigen::VectorXd& psi, const Sv2fModel& grid);
Eigen::VectorXd sv2f_theta(const Sv2fModel& m);
const char* sv2f_param_name(int i);

struct Sv2fData {
  std::vector<double> y;
  std::vector<double> v1, v2;  // T * (M + 1) grid values, one block per observation interval
};

Sv2fData simulate_sv2f(const Sv2fModel& m, int T, std::uint64_t seed);

class Sv2fParticleFilter {
 public:
  explicit Sv2fParticleFilter(int particles, ResampleScheme scheme = ResampleScheme::multinomial);
  LogLikEstimate run(const Sv2fModel& m, const std::vector<double>& y, Rng& rng, bool record_ess = false);
  int particles() const { return n_; }

 private:
  int n_;
  ResampleScheme scheme_;
  std::vector<double> v1_, v2_, n1_, n2_, lw_, w_;
  std::vector<int> idx_;
};

LogLikEstimate sv2f_pf_loglik(const Sv2fModel& m, const std::vector<double>& y, int particles, std::uint64_t seed,
                              ResampleScheme scheme = ResampleScheme::multinomial);

void write_latent_csv(const Sv2fData& d, int substeps, std::ostream& out);

}  // namespace pmtune
