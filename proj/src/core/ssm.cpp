// SPDX-License-Identifier: Apache-2.0
#include "ssm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "errors.hpp"
#include "normal.hpp"

namespace pmtune {

void Ar1Model::validate() const {
  require(std::abs(phi) < 1.0, ErrorCode::domain, "AR(1): |phi| must be < 1");
  require(sigma_x2 > 0.0 && sigma_eps2 > 0.0, ErrorCode::domain, "AR(1): variances must be positive");
  require(std::isfinite(mu_x) && std::isfinite(sigma_x2) && std::isfinite(sigma_eps2), ErrorCode::domain,
          "AR(1): parameters must be finite");
}

Eigen::VectorXd ar1_to_psi(const Ar1Model& m) {
  Eigen::VectorXd psi(3);
  psi << std::atanh(m.phi), m.mu_x, 0.5 * std::log(m.sigma_x2);
  return psi;
}

Ar1Model ar1_from_psi(const Eigen::VectorXd& psi, double sigma_eps2) {
  Ar1Model m;
  m.phi = std::tanh(psi(0));
  m.mu_x = psi(1);
  m.sigma_x2 = std::exp(2.0 * psi(2));
  m.sigma_eps2 = sigma_eps2;
  return m;
}

Eigen::VectorXd ar1_theta(const Ar1Model& m) {
  Eigen::VectorXd th(3);
  th << m.phi, m.mu_x, std::sqrt(m.sigma_x2);
  return th;
}

Ar1Data simulate_ar1(const Ar1Model& m, int T, std::uint64_t seed) {
  m.validate();
  require(T >= 1, ErrorCode::domain, "simulate_ar1: T must be >= 1");
  Rng rng(seed);
  Ar1Data d;
  const double se = std::sqrt(m.sigma_eps2), sh = std::sqrt(m.sigma_eta2());
  double x = rng.normal(m.mu_x, std::sqrt(m.sigma_x2));
  for (int t = 0; t < T; ++t) {
    d.x.push_back(x);
    d.y.push_back(x + se * rng.normal());
    x = m.mu_x * (1.0 - m.phi) + m.phi * x + sh * rng.normal();
  }
  return d;
}

double kalman_loglik(const Ar1Model& m, const std::vector<double>& y) {
  m.validate();
  require(!y.empty(), ErrorCode::domain, "kalman_loglik: empty data");
  double a = m.mu_x, p = m.sigma_x2, ll = 0.0;
  const double q = m.sigma_eta2(), c = m.mu_x * (1.0 - m.phi);
  for (double yt : y) {
    require(std::isfinite(yt), ErrorCode::domain, "kalman_loglik: non-finite observation");
    const double f = p + m.sigma_eps2;
    const double v = yt - a;
    ll += -0.5 * (std::log(2.0 * M_PI * f) + v * v / f);
    const double af = a + p / f * v;
    const double pf = p - p * p / f;
    a = c + m.phi * af;
    p = m.phi * m.phi * pf + q;
  }
  return ll;
}

std::string_view resample_name(ResampleScheme s) {
  return s == ResampleScheme::multinomial ? "multinomial" : "systematic";
}

void resample_normalized(const double* w, int n, ResampleScheme scheme, Rng& rng, int* out) {
  // Both schemes walk the cumulative weights with ascending points; multinomial
  // points are sorted uniforms built from exponential spacings.
  double cum = w[0];
  int j = 0;
  auto place = [&](int k, double u) {
    while (u > cum && j < n - 1) cum += w[++j];
    out[k] = j;
  };
  if (scheme == ResampleScheme::systematic) {
    const double u0 = rng.uniform() / n;
    for (int k = 0; k < n; ++k) place(k, u0 + static_cast<double>(k) / n);
    return;
  }
  thread_local std::vector<double> e;
  e.resize(static_cast<std::size_t>(n) + 1);
  double total = 0.0;
  for (auto& v : e) {
    v = -std::log(rng.uniform_pos());
    total += v;
  }
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    s += e[static_cast<std::size_t>(k)];
    place(k, s / total);
  }
}

double log_mean_weights(const double* lw, int n, double* w, double* ess) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (lw[i] > mx) mx = lw[i];
  if (!(mx > -std::numeric_limits<double>::infinity()) || !std::isfinite(mx))
    return -std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = std::isnan(lw[i]) ? 0.0 : std::exp(lw[i] - mx);
    s += w[i];
  }
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] /= s;
    s2 += w[i] * w[i];
  }
  if (ess) *ess = 1.0 / s2;
  return mx + std::log(s / n);
}

std::vector<int> resample(const std::vector<double>& log_weights, ResampleScheme scheme, Rng& rng) {
  const int n = static_cast<int>(log_weights.size());
  require(n >= 1, ErrorCode::domain, "resample: no weights");
  std::vector<double> w(log_weights.size());
  const double l = log_mean_weights(log_weights.data(), n, w.data());
  require(std::isfinite(l), ErrorCode::domain, "resample: every weight is zero");
  std::vector<int> idx(log_weights.size());
  resample_normalized(w.data(), n, scheme, rng, idx.data());
  return idx;
}

std::vector<int> resample(const std::vector<double>& log_weights, ResampleScheme scheme, std::uint64_t seed) {
  Rng rng(seed);
  return resample(log_weights, scheme, rng);
}

std::string_view filter_name(Ar1Filter f) { return f == Ar1Filter::bootstrap ? "bootstrap" : "fully_adapted"; }

Ar1ParticleFilter::Ar1ParticleFilter(int particles, Ar1Filter kind, ResampleScheme scheme)
    : n_(particles),
      kind_(kind),
      scheme_(scheme),
      x_(particles),
      xn_(particles),
      lw_(particles),
      w_(particles),
      idx_(particles) {
  require(particles >= 2, ErrorCode::domain, "particle filter needs N >= 2");
}

LogLikEstimate Ar1ParticleFilter::run(const Ar1Model& m, const std::vector<double>& y, Rng& rng, bool record_ess) {
  return kind_ == Ar1Filter::bootstrap ? run_bootstrap(m, y, rng, record_ess) : run_adapted(m, y, rng, record_ess);
}

namespace {

LogLikEstimate degenerate_estimate(LogLikEstimate r) {
  r.degenerate = true;
  r.value = -std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace

LogLikEstimate Ar1ParticleFilter::run_bootstrap(const Ar1Model& m, const std::vector<double>& y, Rng& rng,
                                                bool record_ess) {
  LogLikEstimate r;
  r.particles = n_;
  const double sx = std::sqrt(m.sigma_x2), sh = std::sqrt(m.sigma_eta2()), c = m.mu_x * (1.0 - m.phi);
  const double inv2 = 0.5 / m.sigma_eps2;
  const double lconst = -0.5 * std::log(2.0 * M_PI * m.sigma_eps2);
  for (int i = 0; i < n_; ++i) x_[i] = m.mu_x + sx * rng.normal();
  const int T = static_cast<int>(y.size());
  for (int t = 0; t < T; ++t) {
    const double yt = y[static_cast<std::size_t>(t)];
    for (int i = 0; i < n_; ++i) {
      const double d = yt - x_[i];
      lw_[i] = -inv2 * d * d;
    }
    double ess = 0.0;
    const double inc = log_mean_weights(lw_.data(), n_, w_.data(), &ess);
    if (!std::isfinite(inc)) return degenerate_estimate(r);
    r.value += inc + lconst;
    if (record_ess) r.ess.push_back(ess);
    if (t + 1 == T) break;
    resample_normalized(w_.data(), n_, scheme_, rng, idx_.data());
    for (int i = 0; i < n_; ++i) xn_[i] = c + m.phi * x_[idx_[i]] + sh * rng.normal();
    std::swap(x_, xn_);
  }
  return r;
}

LogLikEstimate Ar1ParticleFilter::run_adapted(const Ar1Model& m, const std::vector<double>& y, Rng& rng,
                                              bool record_ess) {
  LogLikEstimate r;
  r.particles = n_;
  const double q = m.sigma_eta2(), e = m.sigma_eps2, c = m.mu_x * (1.0 - m.phi);
  // t = 1: p(y_1) is exact and x_1 is drawn from p(x_1 | y_1).
  {
    const double s = m.sigma_x2 + e;
    const double v = y[0] - m.mu_x;
    r.value = -0.5 * (std::log(2.0 * M_PI * s) + v * v / s);
    const double pv = m.sigma_x2 * e / s;
    const double pm = m.mu_x + m.sigma_x2 / s * v;
    const double sd = std::sqrt(pv);
    for (int i = 0; i < n_; ++i) x_[i] = pm + sd * rng.normal();
    if (record_ess) r.ess.push_back(n_);
  }
  const double s = q + e, inv2 = 0.5 / s;
  const double lconst = -0.5 * std::log(2.0 * M_PI * s);
  const double pv = q * e / s, sd = std::sqrt(pv), gain = q / s;
  const int T = static_cast<int>(y.size());
  for (int t = 1; t < T; ++t) {
    const double yt = y[static_cast<std::size_t>(t)];
    for (int i = 0; i < n_; ++i) {
      const double d = yt - (c + m.phi * x_[i]);
      lw_[i] = -inv2 * d * d;
    }
    double ess = 0.0;
    const double inc = log_mean_weights(lw_.data(), n_, w_.data(), &ess);
    if (!std::isfinite(inc)) return degenerate_estimate(r);
    r.value += inc + lconst;
    if (record_ess) r.ess.push_back(ess);
    resample_normalized(w_.data(), n_, scheme_, rng, idx_.data());
    for (int i = 0; i < n_; ++i) {
      const double pred = c + m.phi * x_[idx_[i]];
      xn_[i] = pred + gain * (yt - pred) + sd * rng.normal();
    }
    std::swap(x_, xn_);
  }
  return r;
}

LogLikEstimate pf_loglik(const Ar1Model& m, const std::vector<double>& y, int particles, std::uint64_t seed,
                         Ar1Filter kind, ResampleScheme scheme) {
  m.validate();
  require(!y.empty(), ErrorCode::domain, "pf_loglik: empty data");
  Ar1ParticleFilter f(particles, kind, scheme);
  Rng rng(seed);
  return f.run(m, y, rng, true);
}

void write_series_csv(const std::vector<double>& y, std::ostream& out) {
  out << "t,y\n";
  char buf[64];
  for (std::size_t t = 0; t < y.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", t + 1, y[t]);
    out << buf;
  }
}

}  // namespace pmtune
