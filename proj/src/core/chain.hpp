// SPDX-License-Identifier: Apache-2.0
//
// Simulators for the exact chain Q_EX, the pseudo-marginal chain Q (synthetic
// Gaussian noise or a real likelihood estimator) and the bounding chain Q*,
// plus the jump-chain transform and trace utilities.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "exact_oracle.hpp"
#include "iact.hpp"
#include "rng.hpp"

namespace pmtune {

struct TargetSpec {
  int dim = 1;
  std::function<double(const Eigen::VectorXd&)> log_density;  // unnormalized
};

enum class ProposalKind { random_walk_t, autoregressive_t, independence };

struct ProposalSpec {
  ProposalKind kind = ProposalKind::random_walk_t;
  Eigen::MatrixXd scale;   // Sigma^{1/2}, lower triangular, so the increment covariance is Sigma
  double nu = 5.0;         // t degrees of freedom, > 2
  double rho = 0.0;        // autoregressive coefficient in [0, 1)
  Eigen::VectorXd center;  // autoregressive kind only
  // Independence kind: sampler and log density up to a constant.
  std::function<Eigen::VectorXd(Rng&)> sampler;
  std::function<double(const Eigen::VectorXd&)> log_density;

  void validate(int dim) const;
  bool symmetric() const { return kind == ProposalKind::random_walk_t; }
  Eigen::VectorXd propose(const Eigen::VectorXd& from, Rng& rng) const;
  // log q(to, from) - log q(from, to)
  double log_ratio(const Eigen::VectorXd& from, const Eigen::VectorXd& to) const;
};

ProposalSpec random_walk_t(Eigen::MatrixXd scale, double nu = 5.0);
ProposalSpec autoregressive_t(Eigen::VectorXd center, Eigen::MatrixXd scale, double rho, double nu = 5.0);

enum class KernelId { q_ex, q, q_star };

std::string_view kernel_name(KernelId id);

struct Trace {
  int dim = 0;
  std::vector<double> theta;  // row-major, size() * dim
  std::vector<double> z;      // noise, or log-likelihood estimate for estimator chains; 0 for Q_EX
  std::vector<char> accepted;
  std::vector<int> state;     // finite-state chains only
  std::uint64_t seed = 0;
  KernelId kernel = KernelId::q_ex;
  std::size_t proposals = 0;
  std::size_t accepts = 0;
  std::size_t infinite_estimates = 0;  // proposals rejected because log p-hat = -inf

  std::size_t size() const { return accepted.size(); }
  double theta_at(std::size_t i, int j) const { return theta[i * dim + j]; }
  std::vector<double> column(int j) const;
  double acceptance_rate() const;
};

struct ChainOptions {
  std::size_t n = 10000;          // recorded iterations
  double burn_in_fraction = 0.1;  // extra iterations run and discarded first
  std::uint64_t seed = 1;
  Eigen::VectorXd init;           // starting theta
};

Trace run_exact_chain(const TargetSpec& target, const ProposalSpec& proposal, const ChainOptions& options);
Trace run_pm_chain_gaussian(const TargetSpec& target, const ProposalSpec& proposal, double sigma,
                            const ChainOptions& options);
Trace run_qstar_chain(const TargetSpec& target, const ProposalSpec& proposal, double sigma,
                      const ChainOptions& options);

// log p-hat(y | theta) for a fresh draw of the auxiliary variables; -inf when the estimator fails.
using LogLikEstimator = std::function<double(const Eigen::VectorXd&, Rng&)>;

// Pseudo-marginal chain with a real estimator. target.log_density is the log prior.
Trace run_pm_chain_estimator(const TargetSpec& prior, const LogLikEstimator& estimator, const ProposalSpec& proposal,
                             const ChainOptions& options);

// Chains on a finite spec. Q and Q* use the spec's discrete z-grid.
Trace run_finite_chain(const FiniteChainSpec& spec, KernelId kernel, std::size_t n, std::uint64_t seed);

struct JumpTrace {
  std::vector<std::size_t> start;    // index in the parent trace of each jump state
  std::vector<std::size_t> sojourn;  // tau_i
  std::size_t parent_size = 0;
};

JumpTrace to_jump_chain(const Trace& trace);
// Flat path indices reconstructed from a jump trace.
std::vector<std::size_t> expand_jump_chain(const JumpTrace& jump);

struct Prop2Report {
  double lhs = 0.0, rhs = 0.0;
  double residual = 0.0;  // lhs / rhs - 1
  double se = 0.0;
};

// Both sides of the jump-chain variance identity estimated from one finite
// chain trace; rho gives the acceptance probability per state.
Prop2Report verify_prop2_empirical(const Trace& trace, const Eigen::VectorXd& h, const Eigen::VectorXd& rho);

void write_trace_csv(const Trace& trace, std::ostream& out);

}  // namespace pmtune
