// SPDX-License-Identifier: Apache-2.0
//
// Exact matrix computations for finite discretizations of the (theta, z)
// chains: Q_EX, Q, Q*, their jump kernels, spectral inefficiencies, and
// checks of the identities that relate them.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gaussian_noise.hpp"
#include "noise_operator.hpp"

namespace pmtune {

struct FiniteChainSpec {
  Eigen::VectorXd pi;         // target on k points
  Eigen::MatrixXd proposal;   // k x k, row-stochastic
  Eigen::VectorXd z_nodes;    // m points
  Eigen::VectorXd z_weights;  // sum = 1 and sum exp(z) w = 1
  double sigma = 0.0;

  int k() const { return static_cast<int>(pi.size()); }
  int m() const { return static_cast<int>(z_nodes.size()); }
  void validate() const;
};

// Gauss-Hermite z-grid with m nodes, node shift enforcing E[exp(Z)] = 1.
FiniteChainSpec make_spec(Eigen::VectorXd pi, Eigen::MatrixXd proposal, double sigma, int m);

enum class ProposalFamily {
  zero_diagonal,  // positive entries, zero diagonal, row-normalized
  gram,           // q(i,j) proportional to (R R^T)_{ij}: positive jump kernels
};

struct RandomSpecOptions {
  int k_min = 3, k_max = 6;
  int m_min = 5, m_max = 9;
  double sigma_min = 0.3, sigma_max = 2.5;
  ProposalFamily family = ProposalFamily::zero_diagonal;
};

struct RandomSpec {
  FiniteChainSpec spec;
  Eigen::VectorXd h;
  std::uint64_t seed = 0;
};

RandomSpec random_spec(std::uint64_t seed, const RandomSpecOptions& options = {});

// Metropolis-Hastings type kernel kept in "move" form: move(i,j) = q(i,j) alpha(i,j),
// including accepted self-proposals, so the jump kernel is well defined.
struct MhKernel {
  Eigen::MatrixXd move;
  Eigen::VectorXd stationary;

  Eigen::MatrixXd transition() const;
};

MhKernel build_mh_matrix(const FiniteChainSpec& spec);

struct PmKernels {
  MhKernel q;       // pseudo-marginal kernel
  MhKernel qstar;   // bounding kernel
};

// Product-space index of (theta_i, z_j) is i * m + j.
PmKernels build_pm_matrices(const FiniteChainSpec& spec);

struct JumpKernel {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd stationary;
  Eigen::VectorXd rho;
};

JumpKernel jump_matrix(const MhKernel& kernel);
// Off-diagonal entries of P are the moves (self-proposals not representable).
JumpKernel jump_matrix(const Eigen::MatrixXd& p, const Eigen::VectorXd& stationary);

struct SpectralDecomposition {
  std::vector<double> lambda;
  std::vector<double> weight;

  double phi(int n) const;
  double inefficiency() const;
};

struct ExactIf {
  double value = 1.0;
  SpectralDecomposition spectrum;
};

// Throws ErrorCode::reducible for a repeated unit eigenvalue and
// ErrorCode::periodic for an eigenvalue at -1.
ExactIf exact_if(const Eigen::MatrixXd& p, const Eigen::VectorXd& stationary, const Eigen::VectorXd& h,
                 bool cross_check = true);

double check_positivity(const Eigen::MatrixXd& p, const Eigen::VectorXd& stationary);

struct TheoremOneTerms {
  double if_q_ex = 0.0;
  double if_jump_ex = 0.0;
  double if_q_star = 0.0;
  double if_q = 0.0;
  double mean_accept = 1.0;
  double inv_accept = 1.0;
  std::vector<double> phi_ex_n;
  std::vector<double> phi_z_n;
  double gamma = 0.0;
  double gamma_alt = 0.0;
  double beta = 0.0;
  double beta_series = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;            // |lhs - rhs| / max(1, |lhs|)
  double tensor_residual = 0.0;     // max |jump(Q*) - kron(jump(Q_EX), jump(Qz))|
  double lemma3_residual = 0.0;     // relative residual of the Q* variance identity
  double prop2_residual = 0.0;      // worst relative residual over Q_EX, Q, Q*
  double peskun_gap = 0.0;          // IF(Q*) - IF(Q), must be >= 0
  double min_eig_jump_ex = 0.0;
  double min_eig_jump_z = 0.0;
  NoiseFunctionals functionals;     // exact discrete functionals
};

TheoremOneTerms verify_theorem1(const FiniteChainSpec& spec, const Eigen::VectorXd& h);

struct BoundCheck {
  std::string name;
  double value = 0.0;
  bool applicable = true;
  bool ok = true;
};

struct BoundReport {
  double rif_q = 0.0;
  double rif_qstar = 0.0;
  double urif1 = 0.0, urif2 = 0.0, urif3 = 0.0, urif4 = 0.0, lrif1 = 0.0, lrif2 = 0.0;
  bool positive_jump_ex = false;
  std::vector<BoundCheck> checks;
  bool ok = true;
};

// Bounds evaluated with exact discrete functionals. urif2 needs
// IF(h/rho_EX, jump kernel) >= 1 and lrif1 a positive jump kernel; checks whose
// hypothesis fails are reported as not applicable.
BoundReport verify_bounds(const FiniteChainSpec& spec, const Eigen::VectorXd& h, const TheoremOneTerms& terms);

// mu(h^2)(1 + IF(h,P)) against mu(rho) tilde-mu(h^2/rho^2)(1 + IF(h/rho, jump)).
double prop2_residual(const MhKernel& kernel, const Eigen::VectorXd& h);

nlohmann::json spec_to_json(const FiniteChainSpec& spec, const Eigen::VectorXd& h, std::uint64_t seed);

struct BatteryOptions {
  int count = 100;
  std::uint64_t seed = 1;
  RandomSpecOptions spec;
  double theorem_tol = 1e-10;
  double tensor_tol = 1e-12;
  double prop2_tol = 1e-10;
  unsigned workers = 1;
};

struct BatteryResult {
  int count = 0;
  int passed = 0;
  double worst_theorem = 0.0;
  double worst_tensor = 0.0;
  double worst_prop2 = 0.0;
  double worst_lemma3 = 0.0;
  double worst_peskun = 0.0;  // most negative IF(Q*) - IF(Q), relative
  int bound_failures = 0;
  int lrif1_applicable = 0;
  int urif2_applicable = 0;
  std::vector<nlohmann::json> failures;
};

BatteryResult run_battery(const BatteryOptions& options);

}  // namespace pmtune
