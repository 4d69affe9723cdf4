// SPDX-License-Identifier: Apache-2.0
#include "sv2f.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "errors.hpp"

namespace pmtune {

void Sv2fModel::validate() const {
  require(std::abs(phi1) < 1.0 && std::abs(phi2) < 1.0, ErrorCode::domain, "sv2f: |phi1|, |phi2| must be < 1");
  require(k1 > 0.0 && k2 > 0.0 && sigma1 > 0.0, ErrorCode::domain, "sv2f: k1, k2, sigma1 must be positive");
  require(delta_obs > 0.0 && substeps >= 1, ErrorCode::domain, "sv2f: need Delta > 0 and M >= 1");
  require(b() > 0.0, ErrorCode::domain, "sv2f: b must be positive");
}

double Sv2fModel::a1() const { return phi1 * (1.0 - phi2 * phi2) / (1.0 - phi1 * phi1 * phi2 * phi2); }
double Sv2fModel::a2() const { return phi2 * (1.0 - phi1 * phi1) / (1.0 - phi1 * phi1 * phi2 * phi2); }
double Sv2fModel::b() const {
  return (1.0 - phi1 * phi1) * (1.0 - phi2 * phi2) / (1.0 - phi1 * phi1 * phi2 * phi2);
}

double sexp(double x, double x0) { return x <= x0 ? std::exp(x) : std::exp(x0) * std::sqrt(1.0 + 2.0 * (x - x0)); }

Eigen::VectorXd sv2f_to_psi(const Sv2fModel& m) {
  Eigen::VectorXd p(kSv2fParams);
  p << std::log(m.k1), m.mu1, std::log(m.sigma1), std::log(m.k2), m.beta12, m.beta2, m.mu_y, std::atanh(m.phi1),
      std::atanh(m.phi2);
  return p;
}

Sv2fModel sv2f_from_psi(const Eigen::VectorXd& p, const Sv2fModel& grid) {
  Sv2fModel m = grid;
  m.k1 = std::exp(p(0));
  m.mu1 = p(1);
  m.sigma1 = std::exp(p(2));
  m.k2 = std::exp(p(3));
  m.beta12 = p(4);
  m.beta2 = p(5);
  m.mu_y = p(6);
  m.phi1 = std::tanh(p(7));
  m.phi2 = std::tanh(p(8));
  return m;
}

Eigen::VectorXd sv2f_theta(const Sv2fModel& m) {
  Eigen::VectorXd t(kSv2fParams);
  t << m.k1, m.mu1, m.sigma1, m.k2, m.beta12, m.beta2, m.mu_y, m.phi1, m.phi2;
  return t;
}

const char* sv2f_param_name(int i) {
  static const char* names[kSv2fParams] = {"k1", "mu1", "sigma1", "k2", "beta12", "beta2", "mu_y", "phi1", "phi2"};
  return i >= 0 && i < kSv2fParams ? names[i] : "?";
}

namespace {

struct Interval {
  double z1 = 0.0, z2 = 0.0, s2 = 0.0;
};

// One observation interval of the Euler scheme, advancing (v1, v2) in place.
inline Interval euler_interval(const Sv2fModel& m, double& v1, double& v2, Rng& rng, double r, double rc,
                               std::vector<double>* p1 = nullptr, std::vector<double>* p2 = nullptr) {
  const double dt = m.delta_obs / m.substeps, sq = std::sqrt(dt);
  Interval out;
  for (int s = 0; s < m.substeps; ++s) {
    const double sig = sexp(0.5 * (v1 + m.beta2 * v2), m.splice);
    const double u1 = rng.normal();
    const double u2 = r * u1 + rc * rng.normal();
    out.z1 += sig * sq * u1;
    out.z2 += sig * sq * u2;
    out.s2 += sig * sig * dt;
    const double nv1 = v1 - m.k1 * (v1 - m.mu1) * dt + m.sigma1 * sq * u1;
    const double nv2 = v2 - m.k2 * v2 * dt + (1.0 + m.beta12 * v2) * sq * u2;
    v1 = nv1;
    v2 = nv2;
    if (p1) {
      p1->push_back(v1);
      p2->push_back(v2);
    }
  }
  return out;
}

void initial_state(const Sv2fModel& m, Rng& rng, double& v1, double& v2) {
  v1 = m.mu1 + m.sigma1 / std::sqrt(2.0 * m.k1) * rng.normal();
  v2 = rng.normal() / std::sqrt(2.0 * m.k2);
}

}  // namespace

Sv2fData simulate_sv2f(const Sv2fModel& m, int T, std::uint64_t seed) {
  m.validate();
  require(T >= 1, ErrorCode::domain, "simulate_sv2f: T must be >= 1");
  Rng rng(seed);
  const double r = m.w_corr(), rc = std::sqrt(1.0 - r * r);
  const double a1 = m.a1(), a2 = m.a2(), b = m.b();
  Sv2fData d;
  double v1, v2;
  initial_state(m, rng, v1, v2);
  for (int t = 0; t < T; ++t) {
    d.v1.push_back(v1);
    d.v2.push_back(v2);
    const Interval iv = euler_interval(m, v1, v2, rng, r, rc, &d.v1, &d.v2);
    d.y.push_back(m.mu_y * m.delta_obs + a1 * iv.z1 + a2 * iv.z2 + std::sqrt(b * iv.s2) * rng.normal());
  }
  return d;
}

Sv2fParticleFilter::Sv2fParticleFilter(int particles, ResampleScheme scheme)
    : n_(particles),
      scheme_(scheme),
      v1_(particles),
      v2_(particles),
      n1_(particles),
      n2_(particles),
      lw_(particles),
      w_(particles),
      idx_(particles) {
  require(particles >= 2, ErrorCode::domain, "particle filter needs N >= 2");
}

LogLikEstimate Sv2fParticleFilter::run(const Sv2fModel& m, const std::vector<double>& y, Rng& rng, bool record_ess) {
  LogLikEstimate res;
  res.particles = n_;
  const double r = m.w_corr(), rc = std::sqrt(1.0 - r * r);
  const double a1 = m.a1(), a2 = m.a2(), b = m.b();
  const double lc = -0.5 * std::log(2.0 * M_PI);
  for (int i = 0; i < n_; ++i) initial_state(m, rng, v1_[i], v2_[i]);
  const std::size_t T = y.size();
  for (std::size_t t = 0; t < T; ++t) {
    for (int i = 0; i < n_; ++i) {
      const Interval iv = euler_interval(m, v1_[i], v2_[i], rng, r, rc);
      const double var = b * iv.s2;
      const double d = y[t] - m.mu_y * m.delta_obs - a1 * iv.z1 - a2 * iv.z2;
      lw_[i] = lc - 0.5 * std::log(var) - 0.5 * d * d / var;
      if (!std::isfinite(lw_[i])) lw_[i] = -std::numeric_limits<double>::infinity();
    }
    double ess = 0.0;
    const double inc = log_mean_weights(lw_.data(), n_, w_.data(), &ess);
    if (!std::isfinite(inc)) {
      res.degenerate = true;
      res.value = -std::numeric_limits<double>::infinity();
      return res;
    }
    res.value += inc;
    if (record_ess) res.ess.push_back(ess);
    if (t + 1 == T) break;
    resample_normalized(w_.data(), n_, scheme_, rng, idx_.data());
    for (int i = 0; i < n_; ++i) {
      n1_[i] = v1_[idx_[i]];
      n2_[i] = v2_[idx_[i]];
    }
    std::swap(v1_, n1_);
    std::swap(v2_, n2_);
  }
  return res;
}

LogLikEstimate sv2f_pf_loglik(const Sv2fModel& m, const std::vector<double>& y, int particles, std::uint64_t seed,
                              ResampleScheme scheme) {
  m.validate();
  require(!y.empty(), ErrorCode::domain, "sv2f_pf_loglik: empty data");
  Sv2fParticleFilter f(particles, scheme);
  Rng rng(seed);
  return f.run(m, y, rng, true);
}

void write_latent_csv(const Sv2fData& d, int substeps, std::ostream& out) {
  out << "t,substep,v1,v2\n";
  char buf[96];
  const std::size_t block = static_cast<std::size_t>(substeps) + 1;
  for (std::size_t i = 0; i < d.v1.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g\n", i / block + 1, i % block, d.v1[i], d.v2[i]);
    out << buf;
  }
}

}  // namespace pmtune
