// SPDX-License-Identifier: Apache-2.0
#include "exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bounds.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace pmtune {
namespace {

constexpr double kUnitTol = 1e-10;

double rel_residual(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(a)); }

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& p, const Eigen::VectorXd& stationary) {
  const Eigen::VectorXd d = stationary.cwiseSqrt();
  Eigen::MatrixXd s = d.asDiagonal() * p * d.cwiseInverse().asDiagonal();
  return 0.5 * (s + s.transpose());
}

MhKernel z_kernel(const FiniteChainSpec& spec) {
  const int m = spec.m();
  MhKernel k;
  k.move.resize(m, m);
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < m; ++l)
      k.move(j, l) = spec.z_weights(l) * std::min(1.0, std::exp(spec.z_nodes(l) - spec.z_nodes(j)));
  k.stationary = (spec.z_nodes.array().exp() * spec.z_weights.array()).matrix();
  return k;
}

Eigen::VectorXd centered(const Eigen::VectorXd& h, const Eigen::VectorXd& mu) {
  return (h.array() - mu.dot(h)).matrix();
}

}  // namespace

void FiniteChainSpec::validate() const {
  const int kk = k();
  require(kk >= 1 && proposal.rows() == kk && proposal.cols() == kk, ErrorCode::domain, "spec: shape mismatch");
  require((pi.array() > 0.0).all() && std::abs(pi.sum() - 1.0) < 1e-12, ErrorCode::domain,
          "spec: target must be positive and sum to 1");
  require((proposal.array() >= 0.0).all(), ErrorCode::domain, "spec: proposal entries must be non-negative");
  require(((proposal.rowwise().sum().array() - 1.0).abs() < 1e-12).all(), ErrorCode::domain,
          "spec: proposal rows must sum to 1");
  require(z_nodes.size() >= 1 && z_nodes.size() == z_weights.size(), ErrorCode::domain, "spec: z-grid shape");
  require((z_weights.array() > 0.0).all(), ErrorCode::domain, "spec: z weights must be positive");
  require(std::abs(z_weights.sum() - 1.0) < 1e-12, ErrorCode::domain, "spec: z weights must sum to 1");
  require(std::abs((z_nodes.array().exp() * z_weights.array()).sum() - 1.0) < 1e-12, ErrorCode::domain,
          "spec: z-grid violates sum exp(z) g = 1");
}

FiniteChainSpec make_spec(Eigen::VectorXd pi, Eigen::MatrixXd proposal, double sigma, int m) {
  FiniteChainSpec s;
  s.pi = std::move(pi);
  s.proposal = std::move(proposal);
  s.sigma = sigma;
  if (sigma == 0.0 || m == 1) {
    s.z_nodes = Eigen::VectorXd::Zero(1);
    s.z_weights = Eigen::VectorXd::Ones(1);
  } else {
    DiscreteNoiseKernel hk = hermite_noise_kernel(sigma, m);
    s.z_nodes = std::move(hk.z);
    s.z_weights = std::move(hk.g);
  }
  s.validate();
  return s;
}

RandomSpec random_spec(std::uint64_t seed, const RandomSpecOptions& o) {
  Rng rng(seed);
  auto uniform_int = [&](int lo, int hi) { return lo + static_cast<int>(rng.bits() % static_cast<std::uint64_t>(hi - lo + 1)); };
  const int k = uniform_int(o.k_min, o.k_max);
  const int m = uniform_int(o.m_min, o.m_max);
  const double sigma = o.sigma_min + (o.sigma_max - o.sigma_min) * rng.uniform();
  Eigen::VectorXd pi(k);
  for (int i = 0; i < k; ++i) pi(i) = -std::log(rng.uniform_pos());  // Dirichlet(1, ..., 1)
  pi /= pi.sum();
  Eigen::MatrixXd q(k, k);
  if (o.family == ProposalFamily::zero_diagonal) {
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) q(i, j) = i == j ? 0.0 : 0.05 + 0.95 * rng.uniform();
  } else {
    const int c = uniform_int(2, 4);
    Eigen::MatrixXd r(k, c);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < c; ++j) r(i, j) = rng.uniform();
    q = r * r.transpose();
  }
  for (int i = 0; i < k; ++i) q.row(i) /= q.row(i).sum();
  RandomSpec out;
  out.seed = seed;
  out.spec = make_spec(std::move(pi), std::move(q), sigma, m);
  out.h.resize(k);
  for (int i = 0; i < k; ++i) out.h(i) = rng.normal();
  return out;
}

Eigen::MatrixXd MhKernel::transition() const {
  Eigen::MatrixXd p = move;
  p.diagonal().array() += 1.0 - move.rowwise().sum().array();
  return p;
}

MhKernel build_mh_matrix(const FiniteChainSpec& spec) {
  spec.validate();
  const int k = spec.k();
  MhKernel out;
  out.move = Eigen::MatrixXd::Zero(k, k);
  out.stationary = spec.pi;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double qij = spec.proposal(i, j);
      if (qij <= 0.0) continue;
      const double r = spec.pi(j) * spec.proposal(j, i) / (spec.pi(i) * qij);
      out.move(i, j) = qij * std::min(1.0, r);
    }
  return out;
}

PmKernels build_pm_matrices(const FiniteChainSpec& spec) {
  spec.validate();
  const int k = spec.k(), m = spec.m(), n = k * m;
  PmKernels out;
  out.q.move = Eigen::MatrixXd::Zero(n, n);
  out.qstar.move = Eigen::MatrixXd::Zero(n, n);
  const Eigen::VectorXd pi_z = (spec.z_nodes.array().exp() * spec.z_weights.array()).matrix();
  out.q.stationary.resize(n);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < m; ++j) out.q.stationary(i * m + j) = spec.pi(i) * pi_z(j);
  out.qstar.stationary = out.q.stationary;
  for (int i = 0; i < k; ++i)
    for (int ip = 0; ip < k; ++ip) {
      const double qij = spec.proposal(i, ip);
      if (qij <= 0.0) continue;
      const double r_ex = spec.pi(ip) * spec.proposal(ip, i) / (spec.pi(i) * qij);
      for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l) {
          const double e = std::exp(spec.z_nodes(l) - spec.z_nodes(j));
          const double base = qij * spec.z_weights(l);
          out.q.move(i * m + j, ip * m + l) = base * std::min(1.0, r_ex * e);
          out.qstar.move(i * m + j, ip * m + l) = base * std::min(1.0, r_ex) * std::min(1.0, e);
        }
    }
  return out;
}

JumpKernel jump_matrix(const MhKernel& kernel) {
  JumpKernel j;
  j.rho = kernel.move.rowwise().sum();
  require((j.rho.array() > 0.0).all(), ErrorCode::reducible, "jump_matrix: a state never moves (rho = 0)");
  j.matrix = j.rho.cwiseInverse().asDiagonal() * kernel.move;
  j.stationary = (kernel.stationary.array() * j.rho.array()).matrix();
  j.stationary /= j.stationary.sum();
  return j;
}

JumpKernel jump_matrix(const Eigen::MatrixXd& p, const Eigen::VectorXd& stationary) {
  MhKernel k;
  k.move = p;
  k.move.diagonal().setZero();
  k.stationary = stationary;
  return jump_matrix(k);
}

double SpectralDecomposition::phi(int n) const {
  double s = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) s += weight[i] * std::pow(lambda[i], n);
  return s;
}

double SpectralDecomposition::inefficiency() const {
  double s = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) s += weight[i] * (1.0 + lambda[i]) / (1.0 - lambda[i]);
  return s;
}

ExactIf exact_if(const Eigen::MatrixXd& p, const Eigen::VectorXd& stationary, const Eigen::VectorXd& h,
                 bool cross_check) {
  const Eigen::VectorXd hb = centered(h, stationary);
  const double var = stationary.dot(hb.cwiseProduct(hb));
  require(var > 1e-300, ErrorCode::domain, "exact_if: h is constant under the stationary law");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(p, stationary));
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const Eigen::VectorXd c = eig.eigenvectors().transpose() * stationary.cwiseSqrt().cwiseProduct(hb);
  int unit = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) unit += lam(i) > 1.0 - kUnitTol;
  require(unit <= 1, ErrorCode::reducible, "exact_if: eigenvalue 1 is repeated (reducible chain)");
  require(lam.minCoeff() > -1.0 + 1e-12, ErrorCode::periodic, "exact_if: eigenvalue at -1 (periodic chain)");
  ExactIf out;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > 1.0 - kUnitTol) continue;
    out.spectrum.lambda.push_back(lam(i));
    out.spectrum.weight.push_back(c(i) * c(i) / var);
  }
  out.value = out.spectrum.inefficiency();
  if (cross_check) {
    Eigen::VectorXd v = hb;
    for (int n = 1; n <= 50; ++n) {
      v = p * v;
      const double direct = stationary.dot(hb.cwiseProduct(v)) / var;
      if (std::abs(direct - out.spectrum.phi(n)) > 1e-10) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "exact_if: spectral and matrix-power autocorrelations disagree at lag %d (%.3g)",
                      n, direct - out.spectrum.phi(n));
        fail(ErrorCode::numerical, buf);
      }
    }
  }
  return out;
}

double check_positivity(const Eigen::MatrixXd& p, const Eigen::VectorXd& stationary) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(p, stationary), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double prop2_residual(const MhKernel& kernel, const Eigen::VectorXd& h) {
  const Eigen::VectorXd hb = centered(h, kernel.stationary);
  const JumpKernel j = jump_matrix(kernel);
  const double lhs =
      kernel.stationary.dot(hb.cwiseProduct(hb)) * (1.0 + exact_if(kernel.transition(), kernel.stationary, hb).value);
  const Eigen::VectorXd hr = hb.cwiseQuotient(j.rho);
  const double rhs = kernel.stationary.dot(j.rho) * j.stationary.dot(hr.cwiseProduct(hr)) *
                     (1.0 + exact_if(j.matrix, j.stationary, hr).value);
  return rel_residual(lhs, rhs);
}

TheoremOneTerms verify_theorem1(const FiniteChainSpec& spec, const Eigen::VectorXd& h) {
  spec.validate();
  require(h.size() == spec.k(), ErrorCode::domain, "verify_theorem1: h has the wrong length");
  const int k = spec.k(), m = spec.m();
  TheoremOneTerms t;
  const Eigen::VectorXd hb = centered(h, spec.pi);

  const MhKernel ex = build_mh_matrix(spec);
  const ExactIf if_ex = exact_if(ex.transition(), ex.stationary, hb);
  const JumpKernel jex = jump_matrix(ex);
  const Eigen::VectorXd h_jump = hb.cwiseQuotient(jex.rho);
  const ExactIf if_jump = exact_if(jex.matrix, jex.stationary, h_jump);
  t.if_q_ex = if_ex.value;
  t.if_jump_ex = if_jump.value;
  t.min_eig_jump_ex = check_positivity(jex.matrix, jex.stationary);

  const MhKernel zk = z_kernel(spec);
  const JumpKernel jz = jump_matrix(zk);
  const double a = zk.stationary.dot(jz.rho);
  const double inv = zk.stationary.dot(jz.rho.cwiseInverse());
  t.mean_accept = a;
  t.inv_accept = inv;
  t.gamma = (inv - 1.0 / a) / inv;
  {
    const Eigen::VectorXd f = jz.rho.cwiseInverse();
    const double mean = jz.stationary.dot(f);
    const double second = jz.stationary.dot(f.cwiseProduct(f));
    t.gamma_alt = (second - mean * mean) / second;
  }
  t.functionals.sigma = spec.sigma;
  t.functionals.mean_accept = a;
  t.functionals.inv_accept = inv;
  SpectralDecomposition sz;
  if (m > 1 && inv - 1.0 / a > 1e-14) {
    sz = exact_if(jz.matrix, jz.stationary, jz.rho.cwiseInverse()).spectrum;
    t.min_eig_jump_z = check_positivity(jz.matrix, jz.stationary);
    t.functionals.phi1 = sz.phi(1);
    t.functionals.if_z = sz.inefficiency();
  }

  const SpectralDecomposition& sx = if_jump.spectrum;
  for (std::size_t i = 0; i < sx.lambda.size(); ++i)
    for (std::size_t j = 0; j < sz.lambda.size(); ++j)
      t.beta += 2.0 * sx.weight[i] * sz.weight[j] / (1.0 - sx.lambda[i] * sz.lambda[j]);
  for (int n = 0; n < 400; ++n) {
    const double pe = sx.phi(n), pz = sz.lambda.empty() ? 0.0 : sz.phi(n);
    if (n < 30) {
      t.phi_ex_n.push_back(pe);
      t.phi_z_n.push_back(pz);
    }
    t.beta_series += 2.0 * pe * pz;
  }
  t.rhs = (1.0 + t.if_q_ex) / a - 1.0 + (1.0 + t.if_q_ex) / (1.0 + t.if_jump_ex) * (inv - 1.0 / a) * t.beta;

  const PmKernels pm = build_pm_matrices(spec);
  Eigen::VectorXd hh(k * m);
  for (int i = 0; i < k; ++i) hh.segment(i * m, m).setConstant(hb(i));
  const ExactIf if_star = exact_if(pm.qstar.transition(), pm.qstar.stationary, hh);
  const ExactIf if_q = exact_if(pm.q.transition(), pm.q.stationary, hh);
  t.if_q_star = if_star.value;
  t.if_q = if_q.value;
  t.lhs = t.if_q_star;
  t.residual = rel_residual(t.lhs, t.rhs);
  t.peskun_gap = t.if_q_star - t.if_q;

  // Jump kernel of Q* against the tensor product of the two jump kernels.
  const JumpKernel jstar = jump_matrix(pm.qstar);
  for (int i = 0; i < k; ++i)
    for (int ip = 0; ip < k; ++ip)
      for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l)
          t.tensor_residual = std::max(
              t.tensor_residual, std::abs(jstar.matrix(i * m + j, ip * m + l) - jex.matrix(i, ip) * jz.matrix(j, l)));

  // pi(h^2)(1 + IF(h,Q*)) = pi(rho_EX) pi_z(1/rho_z) tilde-pi(h^2/rho_EX^2)(1 + IF(h/(rho_EX rho_z), jump(Q*))).
  {
    Eigen::VectorXd g(k * m), mu(k * m);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < m; ++j) {
        g(i * m + j) = hb(i) / (jex.rho(i) * jz.rho(j));
        mu(i * m + j) = jex.stationary(i) * jz.stationary(j);
      }
    Eigen::MatrixXd kron(k * m, k * m);
    for (int i = 0; i < k; ++i)
      for (int ip = 0; ip < k; ++ip) kron.block(i * m, ip * m, m, m) = jex.matrix(i, ip) * jz.matrix;
    const double lhs = spec.pi.dot(hb.cwiseProduct(hb)) * (1.0 + t.if_q_star);
    const double rhs = spec.pi.dot(jex.rho) * inv * jex.stationary.dot(h_jump.cwiseProduct(h_jump)) *
                       (1.0 + exact_if(kron, mu, g).value);
    t.lemma3_residual = rel_residual(lhs, rhs);
  }

  t.prop2_residual = std::max({prop2_residual(ex, hb), prop2_residual(pm.q, hh), prop2_residual(pm.qstar, hh)});
  return t;
}

BoundReport verify_bounds(const FiniteChainSpec& spec, const Eigen::VectorXd& h, const TheoremOneTerms& t) {
  (void)h;
  (void)spec;
  BoundReport r;
  const NoiseFunctionals& nf = t.functionals;
  r.rif_q = t.if_q / t.if_q_ex;
  r.rif_qstar = t.if_q_star / t.if_q_ex;
  r.urif1 = urif1(nf, t.if_q_ex);
  r.urif2 = urif2(nf, t.if_q_ex);
  r.urif3 = urif3(nf, t.if_jump_ex);
  r.urif4 = urif4(nf, t.if_jump_ex);
  r.lrif1 = lrif1(nf, t.if_jump_ex);
  r.lrif2 = lrif2(nf);
  r.positive_jump_ex = t.min_eig_jump_ex >= -1e-12;
  const bool jump_if_ge_1 = t.if_jump_ex >= 1.0;
  auto le = [](double a, double b) { return a <= b + 1e-10 * std::max(1.0, std::abs(b)); };
  auto add = [&](const char* name, double value, bool applicable, bool ok) {
    r.checks.push_back({name, value, applicable, !applicable || ok});
    if (applicable && !ok) r.ok = false;
  };
  add("lrif2<=rif_qstar", r.lrif2, true, le(r.lrif2, r.rif_qstar));
  add("lrif2<=lrif1", r.lrif1, r.positive_jump_ex, le(r.lrif2, r.lrif1));
  add("lrif1<=rif_qstar", r.lrif1, r.positive_jump_ex, le(r.lrif1, r.rif_qstar));
  add("rif_qstar<=urif1", r.urif1, true, le(r.rif_qstar, r.urif1));
  add("rif_qstar<=urif2", r.urif2, jump_if_ge_1, le(r.rif_qstar, r.urif2));
  add("rif_qstar<=urif3", r.urif3, true, le(r.rif_qstar, r.urif3));
  add("rif_qstar<=urif4", r.urif4, true, le(r.rif_qstar, r.urif4));
  add("rif_q<=rif_qstar", r.rif_q, true, le(r.rif_q, r.rif_qstar));
  return r;
}

nlohmann::json spec_to_json(const FiniteChainSpec& spec, const Eigen::VectorXd& h, std::uint64_t seed) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < spec.k(); ++i) rows.push_back(vec(spec.proposal.row(i).transpose()));
  return {{"theta_weights", vec(spec.pi)}, {"proposal_rows", rows},     {"z_nodes", vec(spec.z_nodes)},
          {"z_weights", vec(spec.z_weights)}, {"sigma", spec.sigma}, {"h_values", vec(h)},
          {"seed", seed}};
}

BatteryResult run_battery(const BatteryOptions& o) {
  struct Item {
    TheoremOneTerms terms;
    BoundReport bounds;
    std::string error;
    nlohmann::json spec;
  };
  std::vector<Item> items(static_cast<std::size_t>(std::max(0, o.count)));
  parallel_for(items.size(), o.workers, [&](std::size_t i) {
    const RandomSpec rs = random_spec(derive_seed(o.seed, i), o.spec);
    items[i].spec = spec_to_json(rs.spec, rs.h, rs.seed);
    try {
      items[i].terms = verify_theorem1(rs.spec, rs.h);
      items[i].bounds = verify_bounds(rs.spec, rs.h, items[i].terms);
    } catch (const Error& e) {
      items[i].error = e.what();
    }
  });
  BatteryResult r;
  r.count = o.count;
  for (const Item& it : items) {
    std::vector<std::string> why;
    if (!it.error.empty()) {
      why.push_back(it.error);
    } else {
      const TheoremOneTerms& t = it.terms;
      r.worst_theorem = std::max(r.worst_theorem, t.residual);
      r.worst_tensor = std::max(r.worst_tensor, t.tensor_residual);
      r.worst_prop2 = std::max(r.worst_prop2, t.prop2_residual);
      r.worst_lemma3 = std::max(r.worst_lemma3, t.lemma3_residual);
      const double peskun = t.peskun_gap / std::max(1.0, t.if_q_star);
      r.worst_peskun = std::min(r.worst_peskun, peskun);
      if (t.residual >= o.theorem_tol) why.push_back("theorem1 residual");
      if (t.tensor_residual >= o.tensor_tol) why.push_back("tensor factorization");
      if (t.prop2_residual >= o.prop2_tol) why.push_back("prop2 residual");
      if (t.lemma3_residual >= o.prop2_tol) why.push_back("lemma3 identity");
      if (peskun < -1e-12) why.push_back("peskun ordering");
      if (it.bounds.positive_jump_ex) ++r.lrif1_applicable;
      if (t.if_jump_ex >= 1.0) ++r.urif2_applicable;
      for (const BoundCheck& c : it.bounds.checks)
        if (!c.ok) why.push_back("bound " + c.name);
      if (!it.bounds.ok) ++r.bound_failures;
    }
    if (why.empty()) {
      ++r.passed;
    } else {
      nlohmann::json f = it.spec;
      f["assertions"] = why;
      r.failures.push_back(std::move(f));
    }
  }
  return r;
}

}  // namespace pmtune
