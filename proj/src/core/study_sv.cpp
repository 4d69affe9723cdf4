// SPDX-License-Identifier: Apache-2.0
#include "study_sv.hpp"

#include <cmath>
#include <limits>

#include "chain.hpp"
#include "errors.hpp"

namespace pmtune {
namespace {

LogLikSampler sv_sampler(const Sv2fModel& m, const std::vector<double>& y, ResampleScheme scheme) {
  return [&m, &y, scheme](int n, Rng& rng) {
    Sv2fParticleFilter pf(n, scheme);
    return pf.run(m, y, rng);
  };
}

SvChainSummary summarize(const Trace& t, int particles, const Sv2fModel& grid, IfMethod method) {
  SvChainSummary s;
  s.particles = particles;
  s.iterations = t.size();
  s.acceptance = t.acceptance_rate();
  s.infinite_estimates = t.infinite_estimates;
  std::vector<std::vector<double>> cols(kSv2fParams, std::vector<double>(t.size()));
  Eigen::VectorXd psi(kSv2fParams);
  s.mean_theta = Eigen::VectorXd::Zero(kSv2fParams);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (int j = 0; j < kSv2fParams; ++j) psi(j) = t.theta_at(i, j);
    const Eigen::VectorXd th = sv2f_theta(sv2f_from_psi(psi, grid));
    for (int j = 0; j < kSv2fParams; ++j) cols[j][i] = th(j);
    s.mean_theta += th / static_cast<double>(t.size());
  }
  for (int j = 0; j < kSv2fParams; ++j) s.if_theta[j] = estimate_if(cols[j], method);
  return s;
}

Eigen::MatrixXd sample_cov(const Trace& t, std::size_t from, Eigen::VectorXd* mean) {
  const std::size_t n = t.size() - from;
  Eigen::MatrixXd x(n, t.dim);
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < t.dim; ++j) x(static_cast<Eigen::Index>(i), j) = t.theta_at(from + i, j);
  *mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd c = x.rowwise() - mean->transpose();
  return c.transpose() * c / static_cast<double>(n - 1);
}

}  // namespace

SvStudy run_sv_study(const SvStudyOptions& o) {
  o.truth.validate();
  require(o.T >= 1, ErrorCode::domain, "T must be >= 1");
  auto say = [&](const std::string& s) {
    if (o.progress) o.progress(s);
  };
  SvStudy st;
  st.data = simulate_sv2f(o.truth, o.T, o.data_seed);
  const std::vector<double>& y = st.data.y;
  const Sv2fModel& ref = o.truth;  // reference parameter for the noise calibration

  const LogLikSampler sampler = sv_sampler(ref, y, o.scheme);
  st.choice = choose_n(sampler, o.sigma_target, o.pilot_lo, o.pilot_hi, o.replications, derive_seed(o.seed, 1),
                       std::nullopt, o.workers);
  st.calibrated = *st.choice.confirmation;
  say("calibrated N* = " + std::to_string(st.choice.n_star));

  // Variance at N* against the pilot prediction c / N*.
  {
    double se_logc = 0.0;
    for (const auto& r : st.choice.pilot) {
      const double rel = r.moments.se_var / (r.sigma_hat * r.sigma_hat);
      se_logc += rel * rel;
    }
    se_logc = std::sqrt(se_logc) / static_cast<double>(st.choice.pilot.size());
    const double pred = st.choice.c / st.choice.n_star;
    const double se = std::hypot(st.calibrated.moments.se_var, pred * se_logc);
    st.var_discrepancy = (st.calibrated.moments.var - pred) / se;
  }
  st.tilted = tilted_sample(st.calibrated.z, 20000, derive_seed(o.seed, 2));

  if (!o.run_chains) return st;

  const Eigen::VectorXd psi_ref = sv2f_to_psi(ref);
  const TargetSpec prior{kSv2fParams, [&psi_ref, v = o.prior_variance](const Eigen::VectorXd& p) {
                           return -0.5 * (p - psi_ref).squaredNorm() / v;
                         }};
  auto estimator_for = [&](Sv2fParticleFilter& pf) {
    return [&pf, &y, &ref](const Eigen::VectorXd& psi, Rng& rng) {
      try {
        const Sv2fModel m = sv2f_from_psi(psi, ref);
        return pf.run(m, y, rng).value;
      } catch (const Error&) {
        return -std::numeric_limits<double>::infinity();  // invalid parameter region
      }
    };
  };

  const int n_star = st.choice.n_star;
  Sv2fParticleFilter pf_q(n_star, o.scheme);
  const LogLikEstimator est_q = estimator_for(pf_q);

  // Proposal tuning at N*: a diagonal random walk first, then the scaled
  // covariance of the second half of the previous round, with a global factor
  // steered towards the target acceptance rate.
  const double d = kSv2fParams;
  Eigen::VectorXd x0 = psi_ref;
  Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(kSv2fParams, kSv2fParams) * (o.step / std::sqrt(o.T));
  double lambda = 1.0;
  st.center = psi_ref;
  st.cov = chol * chol.transpose();
  for (int round = 0; round < o.pilot_rounds; ++round) {
    ChainOptions co;
    co.n = o.pilot_length;
    co.burn_in_fraction = 0.0;
    co.seed = derive_seed(o.seed, 10 + round);
    co.init = x0;
    const Trace t = run_pm_chain_estimator(prior, est_q, random_walk_t(lambda * chol, 5.0), co);
    const double acc = t.acceptance_rate();
    say("pilot round " + std::to_string(round) + " acceptance " + std::to_string(acc));
    x0 = Eigen::Map<const Eigen::VectorXd>(&t.theta[(t.size() - 1) * kSv2fParams], kSv2fParams);
    if (acc < 0.02) {  // stuck: a covariance from this round would be degenerate
      lambda *= 0.5;
      continue;
    }
    Eigen::VectorXd mean;
    const Eigen::MatrixXd cov = sample_cov(t, t.size() / 2, &mean);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) continue;
    if (round > 0) lambda *= std::exp(2.0 * (acc - o.target_acceptance));
    chol = (2.38 / std::sqrt(d)) * Eigen::MatrixXd(llt.matrixL());
    st.center = mean;
    st.cov = cov;
  }
  const Eigen::MatrixXd scale = lambda * chol;
  const ProposalSpec proposal = random_walk_t(scale, 5.0);

  {
    ChainOptions co;
    co.n = o.chain_length;
    co.burn_in_fraction = o.burn_in;
    co.seed = derive_seed(o.seed, 20);
    co.init = x0;
    st.q = summarize(run_pm_chain_estimator(prior, est_q, proposal, co), n_star, ref, o.if_method);
    say("chain at N* done");
  }
  {
    Sv2fParticleFilter pf_p(o.proxy_n, o.scheme);
    ChainOptions co;
    co.n = o.proxy_chain_length;
    co.burn_in_fraction = o.burn_in;
    co.seed = derive_seed(o.seed, 21);
    co.init = x0;
    st.proxy = summarize(run_pm_chain_estimator(prior, estimator_for(pf_p), proposal, co), o.proxy_n, ref,
                         o.if_method);
    say("proxy chain done");
  }
  st.proxy_sigma = estimate_sigma(sampler, o.proxy_n, 100, derive_seed(o.seed, 3), std::nullopt, o.workers);
  return st;
}

}  // namespace pmtune
