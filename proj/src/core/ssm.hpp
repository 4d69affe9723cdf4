// SPDX-License-Identifier: Apache-2.0
//
// AR(1) observed with noise: simulation, Kalman log-likelihood and the
// bootstrap particle filter; resampling shared with the SV filter.
#pragma once

#include <cstdint>
#include <ostream>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace pmtune {

// Y_t = X_t + sigma_eps eps_t,  X_{t+1} = mu_x (1 - phi) + phi X_t + sigma_eta eta_t.
struct Ar1Model {
  double phi = 0.8;
  double mu_x = 0.5;
  double sigma_x2 = 1.0;    // marginal state variance
  double sigma_eps2 = 0.5;  // known observation noise variance

  double sigma_eta2() const { return sigma_x2 * (1.0 - phi * phi); }
  void validate() const;
};

// Unconstrained parameterization psi = (atanh phi, mu_x, log sigma_x).
Eigen::VectorXd ar1_to_psi(const Ar1Model& m);
Ar1Model ar1_from_psi(const Eigen::VectorXd& psi, double sigma_eps2);
// theta = (phi, mu_x, sigma_x), the reported parameters.
Eigen::VectorXd ar1_theta(const Ar1Model& m);

struct Ar1Data {
  std::vector<double> y;
  std::vector<double> x;
};

Ar1Data simulate_ar1(const Ar1Model& m, int T, std::uint64_t seed);

double kalman_loglik(const Ar1Model& m, const std::vector<double>& y);

enum class ResampleScheme { multinomial, systematic };

std::string_view resample_name(ResampleScheme s);

// Indices drawn in proportion to exp(log_weights). Throws if every weight is zero.
std::vector<int> resample(const std::vector<double>& log_weights, ResampleScheme scheme, Rng& rng);
std::vector<int> resample(const std::vector<double>& log_weights, ResampleScheme scheme, std::uint64_t seed);

// In-place variant on normalized weights; writes n ancestor indices.
void resample_normalized(const double* w, int n, ResampleScheme scheme, Rng& rng, int* out);

struct LogLikEstimate {
  double value = 0.0;  // log p-hat; -inf when degenerate
  int particles = 0;
  std::vector<double> ess;  // per observation, when requested
  bool degenerate = false;
};

// bootstrap: propagate through the state transition, weight by p(y_t | x_t).
// fully_adapted: weight by p(y_t | x_{t-1}), then draw x_t from p(x_t | x_{t-1}, y_t).
// Both give unbiased likelihood estimates.
enum class Ar1Filter { bootstrap, fully_adapted };

std::string_view filter_name(Ar1Filter f);

// Particle filter with preallocated buffers; one instance per thread.
class Ar1ParticleFilter {
 public:
  explicit Ar1ParticleFilter(int particles, Ar1Filter kind = Ar1Filter::bootstrap,
                             ResampleScheme scheme = ResampleScheme::multinomial);
  LogLikEstimate run(const Ar1Model& m, const std::vector<double>& y, Rng& rng, bool record_ess = false);
  int particles() const { return n_; }

 private:
  LogLikEstimate run_bootstrap(const Ar1Model& m, const std::vector<double>& y, Rng& rng, bool record_ess);
  LogLikEstimate run_adapted(const Ar1Model& m, const std::vector<double>& y, Rng& rng, bool record_ess);

  int n_;
  Ar1Filter kind_;
  ResampleScheme scheme_;
  std::vector<double> x_, xn_, lw_, w_;
  std::vector<int> idx_;
};

LogLikEstimate pf_loglik(const Ar1Model& m, const std::vector<double>& y, int particles, std::uint64_t seed,
                         Ar1Filter kind = Ar1Filter::bootstrap, ResampleScheme scheme = ResampleScheme::multinomial);

// Shared by the filters: log of the mean of exp(lw) and normalized weights in w.
// Returns -inf if every entry is -inf or NaN.
double log_mean_weights(const double* lw, int n, double* w, double* ess = nullptr);

void write_series_csv(const std::vector<double>& y, std::ostream& out);

}  // namespace pmtune
