// SPDX-License-Identifier: Apache-2.0
#include "gaussian_noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"
#include "noise_operator.hpp"
#include "normal.hpp"
#include "parallel.hpp"

namespace pmtune {
namespace {

void check_sigma(double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::domain, "sigma must be positive and finite");
}

// 1 - rhobar(w) = Phi(-w - sigma) + exp(log Phi(w) - w sigma - sigma^2/2),
// i.e. rho_z at z = sigma w + sigma^2/2. Both terms are positive.
double one_minus_rhobar(double w, double sigma) {
  return norm_cdf(-w - sigma) + std::exp(log_norm_cdf(w) - w * sigma - 0.5 * sigma * sigma);
}

template <class F>
double gk_integrate(F f, double a, double b, double tol, double* error) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol, error);
}

constexpr double kQuadTol = 1e-10;

}  // namespace

double noise_density(double sigma, double z) {
  check_sigma(sigma);
  return norm_pdf(z, -0.5 * sigma * sigma, sigma);
}

double tilted_density(double sigma, double z) {
  check_sigma(sigma);
  return norm_pdf(z, 0.5 * sigma * sigma, sigma);
}

double accept_rate_z(double sigma, double z) {
  check_sigma(sigma);
  const double a = norm_cdf(-(z / sigma + 0.5 * sigma));
  const double b = std::exp(-z + log_norm_cdf(z / sigma - 0.5 * sigma));
  return std::min(1.0, a + b);
}

double mean_accept_z(double sigma) {
  require(sigma >= 0.0, ErrorCode::domain, "sigma must be non-negative");
  return 2.0 * norm_cdf(-sigma / std::sqrt(2.0));
}

double mean_accept_z_quadrature(double sigma) {
  check_sigma(sigma);
  double err = 0.0;
  return gk_integrate([sigma](double w) { return norm_pdf(w) * one_minus_rhobar(w, sigma); }, -12.0, 12.0, 1e-13,
                      &err);
}

QuadratureResult inv_accept_quadrature(double sigma) {
  check_sigma(sigma);
  // The integrand behaves like exp(sigma^2) phi(w - sigma) for large w, so the
  // upper limit moves with sigma.
  auto f = [sigma](double w) { return norm_pdf(w) / one_minus_rhobar(w, sigma); };
  QuadratureResult r;
  r.value = gk_integrate(f, -10.0, 10.0 + sigma, kQuadTol, &r.error_estimate);
  double err_wide = 0.0;
  r.widened_value = gk_integrate(f, -12.0, 12.0 + sigma, kQuadTol, &err_wide);
  const bool finite = std::isfinite(r.value) && std::isfinite(r.widened_value);
  const double rel_gap = std::abs(r.widened_value - r.value) / r.value;
  if (!finite || r.error_estimate > 1e-8 * r.value || rel_gap > 1e-8) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "inv_accept quadrature did not converge at sigma=%.6g: value=%.17g widened=%.17g error=%.3g", sigma,
                  r.value, r.widened_value, r.error_estimate);
    fail(ErrorCode::numerical, buf);
  }
  return r;
}

double inv_accept_integral(double sigma) { return inv_accept_quadrature(sigma).value; }

double sample_noise(double sigma, Rng& rng) { return rng.normal(-0.5 * sigma * sigma, sigma); }

double sample_tilted(double sigma, Rng& rng) { return rng.normal(0.5 * sigma * sigma, sigma); }

double sample_jump_z(double sigma, double z, Rng& rng) {
  constexpr long kMaxTries = 100000000;
  for (long t = 0; t < kMaxTries; ++t) {
    const double w = sample_noise(sigma, rng);
    if (w >= z || std::log(rng.uniform_pos()) < w - z) return w;
  }
  fail(ErrorCode::numerical, "sample_jump_z: no acceptance after 1e8 proposals (z=" + std::to_string(z) + ")");
}

double sample_jump_stationary(double sigma, Rng& rng) {
  for (;;) {
    const double z = sample_tilted(sigma, rng);
    if (rng.uniform() < accept_rate_z(sigma, z)) return z;
  }
}

namespace {

// Runs `samples` z-chains from pi_z through the jump kernel. For each lag n,
// mean of 1/rho_z(Z_n) estimates pi_z(rho_z) <1/rho, Qz^n 1/rho>_{tilde pi}.
// visit(n, values) is called for n = 0, 1, ... and returns false to stop.
template <class Visit>
void run_lagged_chains(double sigma, int max_lag, std::size_t samples, Rng& rng, Visit visit) {
  std::vector<double> z(samples), f(samples);
  for (auto& zi : z) zi = sample_tilted(sigma, rng);
  for (int n = 0; n <= max_lag; ++n) {
    for (std::size_t i = 0; i < samples; ++i) f[i] = 1.0 / accept_rate_z(sigma, z[i]);
    if (!visit(n, f)) return;
    if (n < max_lag)
      for (auto& zi : z) zi = sample_jump_z(sigma, zi, rng);
  }
}

McEstimate mean_se(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(v.size());
  const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, sd / std::sqrt(n)};
}

}  // namespace

PhiSequence estimate_phi_sequence(double sigma, int max_lag, std::size_t samples, Rng& rng) {
  check_sigma(sigma);
  require(max_lag >= 0 && samples >= 1, ErrorCode::domain, "need max_lag >= 0 and samples >= 1");
  const double inv_a = 1.0 / mean_accept_z(sigma);
  const double denom = inv_accept_integral(sigma) - inv_a;
  PhiSequence out;
  run_lagged_chains(sigma, max_lag, samples, rng, [&](int n, const std::vector<double>& f) {
    if (n == 0) {
      out.phi.push_back(1.0);
      out.se.push_back(0.0);
      return true;
    }
    const McEstimate m = mean_se(f);
    out.phi.push_back((m.value - inv_a) / denom);
    out.se.push_back(m.se / denom);
    return true;
  });
  return out;
}

McEstimate estimate_phi_n(double sigma, int n, std::size_t samples, Rng& rng) {
  require(n >= 0, ErrorCode::domain, "lag must be non-negative");
  if (n == 0) return {1.0, 0.0};
  const PhiSequence s = estimate_phi_sequence(sigma, n, samples, rng);
  return {s.phi.back(), s.se.back()};
}

IfZEstimate estimate_if_z(double sigma, std::size_t samples, int cutoff, Rng& rng) {
  check_sigma(sigma);
  require(samples >= 2 && cutoff >= 1, ErrorCode::domain, "need samples >= 2 and cutoff >= 1");
  const double inv_a = 1.0 / mean_accept_z(sigma);
  const double denom = inv_accept_integral(sigma) - inv_a;
  IfZEstimate out;
  // Per-chain running sums of 1/rho(Z_n) over the accepted lags give the SE of
  // the truncated sum including the correlation between lags.
  std::vector<double> partial(samples, 0.0);
  run_lagged_chains(sigma, cutoff, samples, rng, [&](int n, const std::vector<double>& f) {
    if (n == 0) return true;
    const McEstimate m = mean_se(f);
    const double phi = (m.value - inv_a) / denom;
    const double se = m.se / denom;
    if (n == 1) {
      out.phi1 = phi;
      out.phi1_se = se;
    }
    if (phi < 2.0 * se) return false;
    for (std::size_t i = 0; i < samples; ++i) partial[i] += f[i];
    out.lags = n;
    return true;
  });
  if (out.lags > 0) {
    const McEstimate s = mean_se(partial);
    out.value = 1.0 + 2.0 * (s.value - out.lags * inv_a) / denom;
    out.se = 2.0 * s.se / denom;
  }
  return out;
}

NoiseLawTable build_table(const std::vector<double>& grid, std::size_t samples, int cutoff, std::uint64_t seed,
                          unsigned workers) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check_sigma(grid[i]);
    require(i == 0 || grid[i] > grid[i - 1], ErrorCode::domain, "sigma grid must be strictly ascending");
  }
  NoiseLawTable t;
  t.grid = grid;
  t.mc_samples = samples;
  t.cutoff = cutoff;
  t.seed = seed;
  t.inv_accept.resize(grid.size());
  t.phi1.resize(grid.size());
  t.if_z.resize(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    t.inv_accept[i] = inv_accept_integral(grid[i]);
    const IfZEstimate e = estimate_if_z(grid[i], samples, cutoff, rng);
    t.phi1[i] = e.phi1;
    t.if_z[i] = e.value;
  });
  return t;
}

void write_table_csv(const NoiseLawTable& t, std::ostream& out) {
  out << "sigma,inv_accept,phi1,if_z,mc_samples,seed\n";
  char buf[512];
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%zu,%llu\n", t.grid[i], t.inv_accept[i], t.phi1[i],
                  t.if_z[i], t.mc_samples, static_cast<unsigned long long>(t.seed));
    out << buf;
  }
}

NoiseFunctionals gaussian_functionals(double sigma) {
  NoiseFunctionals nf;
  nf.sigma = sigma;
  if (sigma == 0.0) return nf;
  check_sigma(sigma);
  nf.mean_accept = mean_accept_z(sigma);
  nf.inv_accept = inv_accept_integral(sigma);
  // Trapezoid discretization error is O(h^2); halving h and extrapolating
  // leaves an error near 1e-6 at a few milliseconds per sigma.
  const KernelFunctionals coarse = kernel_functionals(uniform_noise_kernel(sigma, 201));
  const KernelFunctionals fine = kernel_functionals(uniform_noise_kernel(sigma, 401));
  nf.phi1 = fine.phi1 + (fine.phi1 - coarse.phi1) / 3.0;
  nf.if_z = fine.if_z + (fine.if_z - coarse.if_z) / 3.0;
  return nf;
}

}  // namespace pmtune
