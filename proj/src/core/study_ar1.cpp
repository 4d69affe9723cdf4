// SPDX-License-Identifier: Apache-2.0
#include "study_ar1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chain.hpp"
#include "errors.hpp"
#include "gaussian_noise.hpp"
#include "parallel.hpp"

namespace pmtune {
namespace {

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                            double h) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                           double h) {
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd H(d, d);
  const double f0 = f(x);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd a = x, b = x;
    a(i) += h;
    b(i) -= h;
    H(i, i) = (f(a) - 2.0 * f0 + f(b)) / (h * h);
    for (int j = 0; j < i; ++j) {
      Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
      pp(i) += h, pp(j) += h;
      pm(i) += h, pm(j) -= h;
      mp(i) -= h, mp(j) += h;
      mm(i) -= h, mm(j) -= h;
      H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
    }
  }
  return H;
}

std::vector<double> theta_column(const Trace& t, int j) {
  std::vector<double> c = t.column(j);
  if (j == 0)
    for (double& v : c) v = std::tanh(v);
  if (j == 2)
    for (double& v : c) v = std::exp(v);
  return c;
}

TargetSpec ar1_prior(double variance) {
  return {kAr1Params, [variance](const Eigen::VectorXd& psi) { return -0.5 * psi.squaredNorm() / variance; }};
}

TargetSpec ar1_posterior(const Ar1StudyOptions& o, const std::vector<double>& y) {
  const TargetSpec prior = ar1_prior(o.prior_variance);
  const double eps2 = o.truth.sigma_eps2;
  return {kAr1Params, [prior, eps2, &y](const Eigen::VectorXd& psi) {
            return prior.log_density(psi) + kalman_loglik(ar1_from_psi(psi, eps2), y);
          }};
}

}  // namespace

NewtonResult newton_maximize(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                             int max_iter, double grad_tol) {
  NewtonResult r;
  double fx = f(x);
  require(std::isfinite(fx), ErrorCode::numerical, "newton_maximize: objective not finite at the start");
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    const Eigen::VectorXd g = fd_gradient(f, x, 1e-5);
    if (g.lpNorm<Eigen::Infinity>() < grad_tol) break;
    const Eigen::MatrixXd H = fd_hessian(f, x, 1e-4);
    Eigen::VectorXd step;
    Eigen::LLT<Eigen::MatrixXd> llt(-H);
    if (llt.info() == Eigen::Success)
      step = llt.solve(g);
    else
      step = 0.1 * g / std::max(1.0, g.norm());  // not concave here: small gradient step
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const Eigen::VectorXd xn = x + t * step;
      const double fn = f(xn);
      if (std::isfinite(fn) && fn >= fx) {
        x = xn;
        fx = fn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  r.x = x;
  r.value = fx;
  r.hessian = fd_hessian(f, x, 1e-4);
  return r;
}

Ar1Laplace ar1_laplace(const Ar1Model& start, const std::vector<double>& y) {
  const double eps2 = start.sigma_eps2;
  auto f = [&](const Eigen::VectorXd& psi) {
    const Ar1Model m = ar1_from_psi(psi, eps2);
    if (!(std::abs(m.phi) < 1.0) || !(m.sigma_x2 > 0.0) || !std::isfinite(m.sigma_x2))
      return -std::numeric_limits<double>::infinity();
    return kalman_loglik(m, y);
  };
  const NewtonResult nr = newton_maximize(f, ar1_to_psi(start));
  Eigen::LLT<Eigen::MatrixXd> llt(-nr.hessian);
  require(llt.info() == Eigen::Success, ErrorCode::numerical, "log-likelihood Hessian is not negative definite at the mode");
  Ar1Laplace l;
  l.psi_hat = nr.x;
  l.cov = llt.solve(Eigen::MatrixXd::Identity(kAr1Params, kAr1Params));
  l.loglik = nr.value;
  l.iterations = nr.iterations;
  return l;
}

std::size_t ar1_cell_length(const Ar1StudyOptions& o, int particles) {
  const double n = static_cast<double>(o.chain_length) * o.reference_n / particles;
  return std::max<std::size_t>(1000, static_cast<std::size_t>(std::llround(n)));
}

Ar1Setup ar1_setup(const Ar1StudyOptions& o) {
  o.truth.validate();
  require(o.T >= 1, ErrorCode::domain, "T must be >= 1");
  Ar1Setup st;
  st.data = simulate_ar1(o.truth, o.T, o.data_seed);
  st.sigma_eps2 = o.truth.sigma_eps2;
  const std::vector<double>& y = st.data.y;

  // Newton from a moment-based start, independent of the true parameters.
  Ar1Model start = o.truth;
  {
    double m = 0.0, v = 0.0;
    for (double yt : y) m += yt;
    m /= static_cast<double>(y.size());
    for (double yt : y) v += (yt - m) * (yt - m);
    v /= static_cast<double>(y.size());
    start.phi = 0.5;
    start.mu_x = m;
    start.sigma_x2 = std::max(0.1, v - o.truth.sigma_eps2);
  }
  st.laplace = ar1_laplace(start, y);

  ChainOptions co;
  co.n = o.pilot_length;
  co.burn_in_fraction = o.burn_in;
  co.seed = derive_seed(o.seed, 99);
  co.init = st.laplace.psi_hat;
  const Eigen::MatrixXd l = st.laplace.cov.llt().matrixL();
  const Trace t = run_exact_chain(ar1_posterior(o, y), autoregressive_t(st.laplace.psi_hat, l, 0.0, o.nu), co);
  Eigen::MatrixXd x(t.size(), kAr1Params);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (int j = 0; j < kAr1Params; ++j) x(static_cast<Eigen::Index>(i), j) = t.theta_at(i, j);
  st.pilot_mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd c = x.rowwise() - st.pilot_mean.transpose();
  st.pilot_cov = c.transpose() * c / static_cast<double>(t.size() - 1);

  if (o.scale_source == Ar1ScaleSource::pilot) {
    st.center = st.pilot_mean;
    st.cov = st.pilot_cov;
  } else {
    st.center = st.laplace.psi_hat;
    st.cov = st.laplace.cov;
  }
  return st;
}

Ar1Model Ar1Setup::reference() const { return ar1_from_psi(pilot_mean, sigma_eps2); }

std::vector<CalibrationRow> ar1_sigma_rows(const Ar1StudyOptions& o, const Ar1Setup& setup,
                                           const std::vector<int>& particles, std::uint64_t seed) {
  const Ar1Model bar = setup.reference();
  const std::vector<double>& y = setup.data.y;
  const double exact = kalman_loglik(bar, y);
  const LogLikSampler sampler = [&](int n, Rng& rng) {
    Ar1ParticleFilter pf(n, o.filter, o.scheme);
    return pf.run(bar, y, rng);
  };
  std::vector<CalibrationRow> rows;
  for (std::size_t i = 0; i < particles.size(); ++i)
    rows.push_back(estimate_sigma(sampler, particles[i], o.replications, derive_seed(seed, i), exact, o.workers));
  return rows;
}

Ar1Study run_ar1_study(const Ar1StudyOptions& o) {
  require(!o.n_grid.empty() && !o.rho_grid.empty(), ErrorCode::domain, "empty N or rho grid");
  for (int n : o.n_grid) require(n >= 2, ErrorCode::domain, "particle counts must be >= 2");
  require(std::is_sorted(o.n_grid.begin(), o.n_grid.end()), ErrorCode::domain, "N grid must be ascending");
  auto say = [&](const std::string& s) {
    if (o.progress) o.progress(s);
  };

  Ar1Study st;
  st.setup = ar1_setup(o);
  const Ar1Setup& su = st.setup;
  const std::vector<double>& y = su.data.y;
  const double eps2 = o.truth.sigma_eps2;
  const TargetSpec prior = ar1_prior(o.prior_variance);
  const TargetSpec posterior = ar1_posterior(o, y);
  const Eigen::MatrixXd chol = su.cov.llt().matrixL();
  say("setup done");

  st.sigma_rows = ar1_sigma_rows(o, su, o.n_grid, derive_seed(o.seed, 200));
  say("noise calibration done");

  // Exact chains, one per rho.
  st.exact.resize(o.rho_grid.size());
  parallel_for(o.rho_grid.size(), o.workers, [&](std::size_t r) {
    const double rho = o.rho_grid[r];
    ChainOptions co;
    co.n = o.exact_length;
    co.burn_in_fraction = o.burn_in;
    co.seed = derive_seed(o.seed, 100 + r);
    co.init = su.center;
    const Trace t = run_exact_chain(posterior, autoregressive_t(su.center, chol, rho, o.nu), co);
    Ar1ExactResult& e = st.exact[r];
    e.rho = rho;
    e.iterations = t.size();
    e.acceptance = t.acceptance_rate();
    e.posterior_mean_psi = Eigen::VectorXd::Zero(kAr1Params);
    for (int j = 0; j < kAr1Params; ++j) {
      const auto col = t.column(j);
      double s = 0.0;
      for (double v : col) s += v;
      e.posterior_mean_psi(j) = s / static_cast<double>(col.size());
      e.if_ex[j] = estimate_if(theta_column(t, j), o.if_method);
    }
  });
  say("exact chains done");

  // Pseudo-marginal cells.
  const std::size_t nr = o.rho_grid.size(), nn = o.n_grid.size();
  st.cells.resize(nr * nn);
  parallel_for(nr * nn, o.workers, [&](std::size_t idx) {
    const std::size_t r = idx / nn, i = idx % nn;
    const double rho = o.rho_grid[r];
    const int particles = o.n_grid[i];
    Ar1ParticleFilter pf(particles, o.filter, o.scheme);
    const LogLikEstimator est = [&](const Eigen::VectorXd& psi, Rng& rng) {
      return pf.run(ar1_from_psi(psi, eps2), y, rng).value;
    };
    ChainOptions co;
    co.n = ar1_cell_length(o, particles);
    co.burn_in_fraction = o.burn_in;
    co.seed = derive_seed(o.seed, 1000 + idx);
    co.init = su.center;
    const Trace t = run_pm_chain_estimator(prior, est, autoregressive_t(su.center, chol, rho, o.nu), co);

    Ar1Cell& c = st.cells[idx];
    c.rho = rho;
    c.particles = particles;
    c.sigma = st.sigma_rows[i].sigma_hat;
    c.iterations = t.size();
    c.infinite_estimates = t.infinite_estimates;
    const double s2 = c.sigma * c.sigma;
    for (int j = 0; j < kAr1Params; ++j) {
      c.if_q[j] = estimate_if(theta_column(t, j), o.if_method);
      c.ct[j] = particles * c.if_q[j].value;
      c.rct[j] = c.if_q[j].value / st.exact[r].if_ex[j].value / s2;
      c.ct_mean += c.ct[j] / kAr1Params;
      c.rct_mean += c.rct[j] / kAr1Params;
    }
    std::vector<double> acc(t.accepted.begin(), t.accepted.end());
    c.acceptance = t.acceptance_rate();
    const double p = c.acceptance;
    const double iff = (p > 0.0 && p < 1.0) ? estimate_if(acc, o.if_method).value : 1.0;
    c.acceptance_se = std::sqrt(p * (1.0 - p) * iff / static_cast<double>(t.size()));
    c.acceptance_bound = mean_accept_z(c.sigma) * st.exact[r].acceptance;
    say("cell rho=" + std::to_string(rho) + " N=" + std::to_string(particles) + " done");
  });
  return st;
}

int ar1_ct_argmin(const Ar1Study& study, double rho) {
  int best = -1;
  double v = std::numeric_limits<double>::infinity();
  for (const auto& c : study.cells)
    if (c.rho == rho && c.ct_mean < v) {
      v = c.ct_mean;
      best = c.particles;
    }
  require(best > 0, ErrorCode::domain, "no cells for the requested rho");
  return best;
}

}  // namespace pmtune
