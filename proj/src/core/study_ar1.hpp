// SPDX-License-Identifier: Apache-2.0
//
// AR(1)-plus-noise study: exact and pseudo-marginal chains with the
// autoregressive t proposal across a grid of particle counts.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "calibrate.hpp"
#include "iact.hpp"
#include "ssm.hpp"

namespace pmtune {

enum class Ar1ScaleSource { laplace, pilot };

struct Ar1StudyOptions {
  Ar1Model truth;
  int T = 300;
  std::uint64_t data_seed = 7;
  std::uint64_t seed = 1;
  std::vector<int> n_grid = {11, 16, 22, 31, 43, 60, 83, 116, 161, 224, 312};
  std::vector<double> rho_grid = {0.0, 0.4, 0.6, 0.9};
  double nu = 5.0;
  std::size_t chain_length = 200000;  // at N = reference_n
  int reference_n = 60;
  std::size_t exact_length = 200000;
  double burn_in = 0.1;
  Ar1Filter filter = Ar1Filter::fully_adapted;
  ResampleScheme scheme = ResampleScheme::systematic;
  int replications = 500;
  IfMethod if_method = IfMethod::initial_sequence;
  double prior_variance = 100.0;
  // laplace: centre at the log-likelihood mode, Sigma = -H^{-1}.
  // pilot: centre and Sigma from the mean and covariance of a pilot exact chain.
  Ar1ScaleSource scale_source = Ar1ScaleSource::pilot;
  std::size_t pilot_length = 50000;
  unsigned workers = 1;
  std::function<void(const std::string&)> progress;  // optional
};

// Mode of the Kalman log-likelihood in psi and Sigma = -H^{-1}.
struct Ar1Laplace {
  Eigen::VectorXd psi_hat;
  Eigen::MatrixXd cov;
  double loglik = 0.0;
  int iterations = 0;
};

Ar1Laplace ar1_laplace(const Ar1Model& start, const std::vector<double>& y);

// Newton ascent with finite-difference derivatives; H is returned at the mode.
struct NewtonResult {
  Eigen::VectorXd x;
  Eigen::MatrixXd hessian;
  double value = 0.0;
  int iterations = 0;
};

NewtonResult newton_maximize(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                             int max_iter = 100, double grad_tol = 1e-6);

inline constexpr int kAr1Params = 3;  // phi, mu_x, sigma_x

struct Ar1ExactResult {
  double rho = 0.0;
  std::array<IfEstimate, kAr1Params> if_ex{};
  double acceptance = 0.0;
  Eigen::VectorXd posterior_mean_psi;
  std::size_t iterations = 0;
};

struct Ar1Cell {
  double rho = 0.0;
  int particles = 0;
  double sigma = 0.0;
  std::array<IfEstimate, kAr1Params> if_q{};
  std::array<double, kAr1Params> ct{};
  std::array<double, kAr1Params> rct{};
  double ct_mean = 0.0;
  double rct_mean = 0.0;
  double acceptance = 0.0;
  double acceptance_se = 0.0;
  double acceptance_bound = 0.0;  // 2 Phi(-sigma / sqrt 2) times the exact acceptance rate
  std::size_t iterations = 0;
  std::size_t infinite_estimates = 0;
};

// Data, likelihood mode, and a pilot exact chain whose mean is the reference
// parameter theta-bar.
struct Ar1Setup {
  Ar1Data data;
  Ar1Laplace laplace;
  Eigen::VectorXd pilot_mean;  // psi
  Eigen::MatrixXd pilot_cov;
  Eigen::VectorXd center;  // proposal centre and covariance actually used
  Eigen::MatrixXd cov;
  double sigma_eps2 = 0.5;
  Ar1Model reference() const;  // at pilot_mean
};

Ar1Setup ar1_setup(const Ar1StudyOptions& options);

struct Ar1Study {
  Ar1Setup setup;
  std::vector<CalibrationRow> sigma_rows;  // one per n_grid entry, at theta-bar
  std::vector<Ar1ExactResult> exact;       // one per rho
  std::vector<Ar1Cell> cells;              // rho-major
};

std::size_t ar1_cell_length(const Ar1StudyOptions& o, int particles);

Ar1Study run_ar1_study(const Ar1StudyOptions& options);

// sigma(theta-bar; N) for each N with the Kalman reference.
std::vector<CalibrationRow> ar1_sigma_rows(const Ar1StudyOptions& options, const Ar1Setup& setup,
                                           const std::vector<int>& particles, std::uint64_t seed);

// Particle count with the smallest mean CT for a given rho.
int ar1_ct_argmin(const Ar1Study& study, double rho);

}  // namespace pmtune
