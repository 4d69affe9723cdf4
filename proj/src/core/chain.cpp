// SPDX-License-Identifier: Apache-2.0
#include "chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "errors.hpp"
#include "gaussian_noise.hpp"

namespace pmtune {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::VectorXd std_t_vector(int d, double nu, Rng& rng) {
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x(i) = rng.normal();
  return x / std::sqrt(rng.chi_squared(nu) / nu);
}

// Log kernel of a multivariate t with lower-triangular scale L, up to the
// normalizing constant (which is the same for both directions).
double log_t_kernel(const Eigen::VectorXd& x, const Eigen::MatrixXd& l, double nu) {
  const Eigen::VectorXd u = l.triangularView<Eigen::Lower>().solve(x);
  return -0.5 * (nu + static_cast<double>(x.size())) * std::log1p(u.squaredNorm() / nu);
}

struct Candidate {
  Eigen::VectorXd theta;
  double z = 0.0;
  double log_target = 0.0;
  double log_alpha = kNegInf;
  bool infinite = false;
};

struct Current {
  Eigen::VectorXd theta;
  double z = 0.0;
  double log_target = 0.0;
};

// Generic MH driver: `step` fills a candidate from the current state.
template <class Step>
Trace run_mh(int dim, KernelId kernel, Current cur, const ChainOptions& o, Rng& rng, Step step) {
  require(o.n >= 1, ErrorCode::domain, "chain length must be >= 1");
  require(o.burn_in_fraction >= 0.0, ErrorCode::domain, "burn-in fraction must be >= 0");
  Trace t;
  t.dim = dim;
  t.seed = o.seed;
  t.kernel = kernel;
  t.theta.reserve(o.n * dim);
  t.z.reserve(o.n);
  t.accepted.reserve(o.n);
  const std::size_t burn = static_cast<std::size_t>(std::floor(o.burn_in_fraction * static_cast<double>(o.n)));
  for (std::size_t it = 0; it < burn + o.n; ++it) {
    Candidate c = step(cur, rng);
    const double log_u = std::log(rng.uniform_pos());
    const bool acc = !c.infinite && log_u < c.log_alpha;
    const bool record = it >= burn;
    if (record) {
      ++t.proposals;
      t.infinite_estimates += c.infinite;
      t.accepts += acc;
    }
    if (acc) {
      cur.theta = std::move(c.theta);
      cur.z = c.z;
      cur.log_target = c.log_target;
    }
    if (record) {
      for (int j = 0; j < dim; ++j) t.theta.push_back(cur.theta(j));
      t.z.push_back(cur.z);
      t.accepted.push_back(acc || it == burn);
    }
  }
  return t;
}

Current start_point(const TargetSpec& target, const ChainOptions& o) {
  require(o.init.size() == target.dim, ErrorCode::domain, "initial point has the wrong dimension");
  Current c;
  c.theta = o.init;
  c.log_target = target.log_density(o.init);
  require(std::isfinite(c.log_target), ErrorCode::domain, "log-density is not finite at the initial point");
  return c;
}

double ex_log_ratio(const ProposalSpec& p, const Current& cur, const Eigen::VectorXd& to, double log_target_to) {
  if (!std::isfinite(log_target_to)) return kNegInf;
  return log_target_to - cur.log_target + (p.symmetric() ? 0.0 : p.log_ratio(cur.theta, to));
}

}  // namespace

void ProposalSpec::validate(int dim) const {
  if (kind == ProposalKind::independence) {
    require(static_cast<bool>(sampler) && static_cast<bool>(log_density), ErrorCode::domain,
            "independence proposal needs a sampler and a log density");
    return;
  }
  require(scale.rows() == dim && scale.cols() == dim, ErrorCode::domain, "proposal scale has the wrong shape");
  require((scale.diagonal().array().abs() > 0.0).all(), ErrorCode::domain, "proposal scale must have full rank");
  require(nu > 2.0, ErrorCode::domain, "proposal degrees of freedom must exceed 2");
  if (kind == ProposalKind::autoregressive_t) {
    require(rho >= 0.0 && rho < 1.0, ErrorCode::domain, "autoregressive coefficient must be in [0, 1)");
    require(center.size() == dim, ErrorCode::domain, "autoregressive center has the wrong dimension");
  }
}

Eigen::VectorXd ProposalSpec::propose(const Eigen::VectorXd& from, Rng& rng) const {
  switch (kind) {
    case ProposalKind::independence: return sampler(rng);
    case ProposalKind::random_walk_t:
      return from + std::sqrt((nu - 2.0) / nu) * (scale * std_t_vector(static_cast<int>(from.size()), nu, rng));
    case ProposalKind::autoregressive_t: {
      const double s = std::sqrt((1.0 - rho * rho) * (nu - 2.0) / nu);
      return (1.0 - rho) * center + rho * from + s * (scale * std_t_vector(static_cast<int>(from.size()), nu, rng));
    }
  }
  fail(ErrorCode::assertion, "unknown proposal kind");
}

double ProposalSpec::log_ratio(const Eigen::VectorXd& from, const Eigen::VectorXd& to) const {
  switch (kind) {
    case ProposalKind::random_walk_t: return 0.0;
    case ProposalKind::independence: return log_density(from) - log_density(to);
    case ProposalKind::autoregressive_t: {
      const Eigen::MatrixXd l = std::sqrt((1.0 - rho * rho) * (nu - 2.0) / nu) * scale;
      auto loc = [&](const Eigen::VectorXd& x) { return ((1.0 - rho) * center + rho * x).eval(); };
      return log_t_kernel(from - loc(to), l, nu) - log_t_kernel(to - loc(from), l, nu);
    }
  }
  fail(ErrorCode::assertion, "unknown proposal kind");
}

ProposalSpec random_walk_t(Eigen::MatrixXd scale, double nu) {
  ProposalSpec p;
  p.kind = ProposalKind::random_walk_t;
  p.scale = std::move(scale);
  p.nu = nu;
  return p;
}

ProposalSpec autoregressive_t(Eigen::VectorXd center, Eigen::MatrixXd scale, double rho, double nu) {
  ProposalSpec p;
  p.kind = ProposalKind::autoregressive_t;
  p.center = std::move(center);
  p.scale = std::move(scale);
  p.rho = rho;
  p.nu = nu;
  return p;
}

std::string_view kernel_name(KernelId id) {
  switch (id) {
    case KernelId::q_ex: return "Q_EX";
    case KernelId::q: return "Q";
    case KernelId::q_star: return "Q*";
  }
  return "?";
}

std::vector<double> Trace::column(int j) const {
  std::vector<double> c(size());
  for (std::size_t i = 0; i < size(); ++i) c[i] = theta_at(i, j);
  return c;
}

double Trace::acceptance_rate() const {
  return proposals == 0 ? 0.0 : static_cast<double>(accepts) / static_cast<double>(proposals);
}

Trace run_exact_chain(const TargetSpec& target, const ProposalSpec& proposal, const ChainOptions& o) {
  proposal.validate(target.dim);
  Rng rng(o.seed);
  return run_mh(target.dim, KernelId::q_ex, start_point(target, o), o, rng, [&](const Current& cur, Rng& r) {
    Candidate c;
    c.theta = proposal.propose(cur.theta, r);
    c.log_target = target.log_density(c.theta);
    c.log_alpha = ex_log_ratio(proposal, cur, c.theta, c.log_target);
    return c;
  });
}

namespace {

Trace run_noisy(const TargetSpec& target, const ProposalSpec& proposal, double sigma, const ChainOptions& o,
                KernelId kernel) {
  require(sigma >= 0.0 && std::isfinite(sigma), ErrorCode::domain, "sigma must be >= 0");
  proposal.validate(target.dim);
  Rng rng(o.seed);
  Current start = start_point(target, o);
  // sigma = 0 draws nothing for the noise, so the path matches the exact chain.
  if (sigma > 0.0) start.z = sample_noise(sigma, rng);
  return run_mh(target.dim, kernel, start, o, rng, [&](const Current& cur, Rng& r) {
    Candidate c;
    c.theta = proposal.propose(cur.theta, r);
    c.log_target = target.log_density(c.theta);
    c.z = sigma > 0.0 ? sample_noise(sigma, r) : 0.0;
    const double ex = ex_log_ratio(proposal, cur, c.theta, c.log_target);
    c.log_alpha = kernel == KernelId::q ? ex + c.z - cur.z : std::min(0.0, ex) + std::min(0.0, c.z - cur.z);
    return c;
  });
}

}  // namespace

Trace run_pm_chain_gaussian(const TargetSpec& target, const ProposalSpec& proposal, double sigma,
                            const ChainOptions& o) {
  return run_noisy(target, proposal, sigma, o, KernelId::q);
}

Trace run_qstar_chain(const TargetSpec& target, const ProposalSpec& proposal, double sigma, const ChainOptions& o) {
  return run_noisy(target, proposal, sigma, o, KernelId::q_star);
}

Trace run_pm_chain_estimator(const TargetSpec& prior, const LogLikEstimator& estimator, const ProposalSpec& proposal,
                             const ChainOptions& o) {
  proposal.validate(prior.dim);
  Rng rng(o.seed);
  Current start = start_point(prior, o);
  start.z = estimator(start.theta, rng);
  require(std::isfinite(start.z), ErrorCode::numerical, "likelihood estimate is not finite at the initial point");
  return run_mh(prior.dim, KernelId::q, start, o, rng, [&](const Current& cur, Rng& r) {
    Candidate c;
    c.theta = proposal.propose(cur.theta, r);
    c.log_target = prior.log_density(c.theta);
    if (!std::isfinite(c.log_target)) return c;  // outside the prior support: no estimator call
    c.z = estimator(c.theta, r);
    if (!std::isfinite(c.z)) {
      c.infinite = true;
      return c;
    }
    c.log_alpha = c.log_target + c.z - cur.log_target - cur.z +
                  (proposal.symmetric() ? 0.0 : proposal.log_ratio(cur.theta, c.theta));
    return c;
  });
}

Trace run_finite_chain(const FiniteChainSpec& spec, KernelId kernel, std::size_t n, std::uint64_t seed) {
  spec.validate();
  require(n >= 1, ErrorCode::domain, "chain length must be >= 1");
  const int k = spec.k(), m = spec.m();
  Rng rng(seed);
  auto draw = [&](auto weights, int size) {
    double u = rng.uniform(), acc = 0.0;
    for (int j = 0; j < size; ++j) {
      acc += weights(j);
      if (u < acc) return j;
    }
    return size - 1;
  };
  const bool noisy = kernel != KernelId::q_ex;
  int i = draw([&](int j) { return spec.pi(j); }, k);
  const Eigen::VectorXd pi_z = (spec.z_nodes.array().exp() * spec.z_weights.array()).matrix();
  int l = noisy ? draw([&](int j) { return pi_z(j); }, m) : 0;
  Trace t;
  t.dim = 1;
  t.seed = seed;
  t.kernel = kernel;
  for (std::size_t it = 0; it < n; ++it) {
    const int ip = draw([&](int j) { return spec.proposal(i, j); }, k);
    const int lp = noisy ? draw([&](int j) { return spec.z_weights(j); }, m) : 0;
    const double r_ex = spec.pi(ip) * spec.proposal(ip, i) / (spec.pi(i) * spec.proposal(i, ip));
    const double e = noisy ? std::exp(spec.z_nodes(lp) - spec.z_nodes(l)) : 1.0;
    double alpha = 0.0;
    switch (kernel) {
      case KernelId::q_ex: alpha = std::min(1.0, r_ex); break;
      case KernelId::q: alpha = std::min(1.0, r_ex * e); break;
      case KernelId::q_star: alpha = std::min(1.0, r_ex) * std::min(1.0, e); break;
    }
    const bool acc = rng.uniform() < alpha;
    ++t.proposals;
    if (acc) {
      ++t.accepts;
      i = ip;
      l = lp;
    }
    t.theta.push_back(i);
    t.z.push_back(noisy ? spec.z_nodes(l) : 0.0);
    t.state.push_back(noisy ? i * m + l : i);
    t.accepted.push_back(acc || it == 0);
  }
  return t;
}

JumpTrace to_jump_chain(const Trace& trace) {
  JumpTrace j;
  j.parent_size = trace.size();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.accepted[i] || i == 0) {
      j.start.push_back(i);
      j.sojourn.push_back(1);
    } else {
      ++j.sojourn.back();
    }
  }
  return j;
}

std::vector<std::size_t> expand_jump_chain(const JumpTrace& jump) {
  std::vector<std::size_t> out;
  out.reserve(jump.parent_size);
  for (std::size_t i = 0; i < jump.start.size(); ++i)
    for (std::size_t s = 0; s < jump.sojourn[i]; ++s) out.push_back(jump.start[i]);
  return out;
}

namespace {

Prop2Report prop2_block(const Trace& trace, std::size_t begin, std::size_t end, const Eigen::VectorXd& h,
                        const Eigen::VectorXd& rho) {
  std::vector<double> hs;
  hs.reserve(end - begin);
  double mean_rho = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    hs.push_back(h(trace.state[i]));
    mean_rho += rho(trace.state[i]);
  }
  const double n = static_cast<double>(end - begin);
  mean_rho /= n;
  double hm = 0.0;
  for (double v : hs) hm += v;
  hm /= n;
  double var = 0.0;
  for (double v : hs) var += (v - hm) * (v - hm);
  var /= n;
  std::vector<double> f;
  for (std::size_t i = begin; i < end; ++i)
    if (trace.accepted[i] || i == begin) f.push_back((h(trace.state[i]) - hm) / rho(trace.state[i]));
  double f2 = 0.0;
  for (double v : f) f2 += v * v;
  f2 /= static_cast<double>(f.size());
  Prop2Report r;
  r.lhs = var * (1.0 + if_initial_sequence(hs).value);
  r.rhs = mean_rho * f2 * (1.0 + if_initial_sequence(f).value);
  r.residual = r.lhs / r.rhs - 1.0;
  return r;
}

}  // namespace

Prop2Report verify_prop2_empirical(const Trace& trace, const Eigen::VectorXd& h, const Eigen::VectorXd& rho) {
  require(!trace.state.empty(), ErrorCode::unsupported,
          "verify_prop2_empirical needs a finite-state trace (rho is intractable otherwise)");
  require(h.size() == rho.size(), ErrorCode::domain, "h and rho must have the same length");
  constexpr std::size_t kBlocks = 20;
  const std::size_t n = trace.size();
  require(n >= kBlocks * 1000, ErrorCode::domain, "verify_prop2_empirical needs at least 20000 iterations");
  Prop2Report r = prop2_block(trace, 0, n, h, rho);
  // Standard error from the spread of the residual over consecutive blocks.
  std::vector<double> res;
  for (std::size_t b = 0; b < kBlocks; ++b) res.push_back(prop2_block(trace, b * n / kBlocks, (b + 1) * n / kBlocks, h, rho).residual);
  double m = 0.0, ss = 0.0;
  for (double v : res) m += v;
  m /= kBlocks;
  for (double v : res) ss += (v - m) * (v - m);
  r.se = std::sqrt(ss / (kBlocks - 1) / kBlocks);
  return r;
}

void write_trace_csv(const Trace& t, std::ostream& out) {
  out << "iter,accepted,z";
  for (int j = 1; j <= t.dim; ++j) out << ",theta_" << j;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << i << ',' << int(t.accepted[i]);
    std::snprintf(buf, sizeof buf, ",%.17g", t.z[i]);
    out << buf;
    for (int j = 0; j < t.dim; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", t.theta_at(i, j));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace pmtune
