// SPDX-License-Identifier: Apache-2.0
#include "calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "errors.hpp"
#include "parallel.hpp"

namespace pmtune {
namespace {

double sample_sd(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

ZDiagnostics z_diagnostics(const std::vector<double>& z, double sigma, bool estimated_reference) {
  require(z.size() >= 100, ErrorCode::domain, "z_diagnostics needs at least 100 samples");
  ZDiagnostics d;
  d.n = z.size();
  const double n = static_cast<double>(z.size());
  for (double v : z) d.mean += v;
  d.mean /= n;
  std::vector<double> c2, c3, c4, shift;
  for (double v : z) {
    const double e = v - d.mean;
    c2.push_back(e * e);
    c3.push_back(e * e * e);
    c4.push_back(e * e * e * e);
  }
  auto avg = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / n;
  };
  d.var = avg(c2) * n / (n - 1.0);
  d.m3 = avg(c3);
  d.m4 = avg(c4);
  d.sigma = sigma > 0.0 ? sigma : std::sqrt(d.var);
  const double s2 = d.sigma * d.sigma;
  d.se_mean = std::sqrt(d.var / n);
  d.se_var = sample_sd(c2) / std::sqrt(n);
  d.se_m3 = sample_sd(c3) / std::sqrt(n);
  d.se_m4 = sample_sd(c4) / std::sqrt(n);
  d.d_mean = (d.mean + 0.5 * s2) / d.se_mean;
  d.d_var = (d.var - s2) / d.se_var;
  d.d_m3 = d.m3 / d.se_m3;
  d.d_m4 = (d.m4 - 3.0 * s2 * s2) / d.se_m4;
  // Influence function of var + 2 mean; an estimated reference log p-tilde =
  // log mean exp(log p-hat) contributes -2 (exp(z) - 1).
  for (std::size_t i = 0; i < z.size(); ++i)
    shift.push_back(c2[i] + 2.0 * (z[i] - d.mean) - (estimated_reference ? 2.0 * std::expm1(z[i]) : 0.0));
  d.d_shift = (d.var + 2.0 * d.mean) / (sample_sd(shift) / std::sqrt(n));
  return d;
}

CalibrationRow estimate_sigma(const LogLikSampler& sampler, int particles, int replications, std::uint64_t seed,
                              std::optional<double> exact, unsigned workers) {
  require(replications >= 30, ErrorCode::domain, "estimate_sigma needs S >= 30");
  std::vector<double> est(static_cast<std::size_t>(replications));
  parallel_for(est.size(), workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    est[i] = sampler(particles, rng).value;
  });
  CalibrationRow row;
  row.particles = particles;
  row.replications = replications;
  std::vector<double> ok;
  for (double v : est) {
    if (std::isfinite(v))
      ok.push_back(v);
    else
      ++row.degenerate;
  }
  require(ok.size() >= 30, ErrorCode::numerical, "estimate_sigma: fewer than 30 non-degenerate filter runs");
  double ref = 0.0;
  if (exact) {
    ref = *exact;
  } else {
    const double mx = *std::max_element(ok.begin(), ok.end());
    double s = 0.0;
    for (double v : ok) s += std::exp(v - mx);
    ref = mx + std::log(s / static_cast<double>(ok.size()));
  }
  for (double v : ok) row.z.push_back(v - ref);
  row.sigma_hat = sample_sd(row.z);
  if (row.z.size() >= 100) {
    row.moments = z_diagnostics(row.z, row.sigma_hat, !exact.has_value());
    row.se = row.moments.se_var / (2.0 * row.sigma_hat);
  } else {
    for (double v : row.z) row.moments.mean += v / static_cast<double>(row.z.size());
    row.moments.var = row.sigma_hat * row.sigma_hat;
    row.moments.n = row.z.size();
    // Delta method on the Gaussian variance of the sample variance.
    row.se = row.sigma_hat / std::sqrt(2.0 * static_cast<double>(row.z.size() - 1));
  }
  return row;
}

NChoice fit_n_choice(const std::vector<int>& particles, const std::vector<double>& sigma2, double sigma_target) {
  require(particles.size() == sigma2.size() && particles.size() >= 2, ErrorCode::domain,
          "fit_n_choice needs at least two pilot points");
  require(sigma_target > 0.0, ErrorCode::domain, "sigma target must be positive");
  const std::size_t k = particles.size();
  std::vector<double> x(k), y(k);
  double logc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    require(particles[i] > 0 && sigma2[i] > 0.0, ErrorCode::domain, "pilot values must be positive");
    x[i] = std::log(static_cast<double>(particles[i]));
    y[i] = std::log(sigma2[i]);
    logc += y[i] + x[i];
  }
  NChoice c;
  c.c = std::exp(logc / static_cast<double>(k));
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  c.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  c.r_squared = sxx > 0.0 && syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  c.poor_fit = c.r_squared < 0.9;
  // The guard keeps an exact ratio such as 100 / 1 from rounding up to 101.
  c.n_star = std::max(2, static_cast<int>(std::ceil(c.c / (sigma_target * sigma_target) - 1e-9)));
  return c;
}

NChoice choose_n(const LogLikSampler& sampler, double sigma_target, int n_lo, int n_hi, int replications,
                 std::uint64_t seed, std::optional<double> exact, unsigned workers) {
  require(n_lo >= 2 && n_hi > n_lo, ErrorCode::domain, "choose_n needs 2 <= n_lo < n_hi");
  std::vector<int> grid;
  for (int i = 0; i < 5; ++i) {
    const double f = i / 4.0;
    grid.push_back(static_cast<int>(std::lround(std::exp((1.0 - f) * std::log(n_lo) + f * std::log(n_hi)))));
  }
  std::vector<CalibrationRow> rows;
  std::vector<double> s2;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rows.push_back(estimate_sigma(sampler, grid[i], replications, derive_seed(seed, i), exact, workers));
    s2.push_back(rows.back().sigma_hat * rows.back().sigma_hat);
  }
  NChoice c = fit_n_choice(grid, s2, sigma_target);
  c.pilot = std::move(rows);
  c.confirmation = estimate_sigma(sampler, c.n_star, replications, derive_seed(seed, 1000), exact, workers);
  return c;
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 3, ErrorCode::domain, "linear_fit_r2 needs at least three points");
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / k;
    my += y[i] / k;
  }
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0 && syy > 0.0, ErrorCode::domain, "linear_fit_r2: constant input");
  return sxy * sxy / (sxx * syy);
}

double inverse_variance_r2(const std::vector<int>& particles, const std::vector<double>& sigma) {
  require(particles.size() == sigma.size(), ErrorCode::domain, "size mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    x.push_back(particles[i]);
    y.push_back(1.0 / (sigma[i] * sigma[i]));
  }
  return linear_fit_r2(x, y);
}

double variance_vs_inverse_n_r2(const std::vector<int>& particles, const std::vector<double>& sigma) {
  require(particles.size() == sigma.size(), ErrorCode::domain, "size mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    x.push_back(1.0 / particles[i]);
    y.push_back(sigma[i] * sigma[i]);
  }
  return linear_fit_r2(x, y);
}

TiltedSample tilted_sample(const std::vector<double>& z, std::size_t n, std::uint64_t seed) {
  require(!z.empty(), ErrorCode::domain, "tilted_sample: no input samples");
  Rng rng(seed);
  const std::size_t m = z.size();
  auto pick = [&] { return static_cast<std::size_t>(rng.bits() % m); };
  std::size_t cur = pick();
  // Burn-in of n / 10 steps, matching the chain default.
  const std::size_t burn = n / 10;
  TiltedSample out;
  std::size_t acc = 0;
  for (std::size_t it = 0; it < burn + n; ++it) {
    const std::size_t prop = pick();
    const bool a = std::log(rng.uniform_pos()) < z[prop] - z[cur];
    if (a) cur = prop;
    if (it >= burn) {
      acc += a;
      out.z.push_back(z[cur]);
    }
  }
  out.acceptance = n ? static_cast<double>(acc) / static_cast<double>(n) : 0.0;
  return out;
}

void write_calibration_csv(const std::vector<CalibrationRow>& rows, std::ostream& out) {
  out << "N,sigma_hat,se,mean_z,var_z,m3,m4,S\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.particles, r.sigma_hat, r.se,
                  r.moments.mean, r.moments.var, r.moments.m3, r.moments.m4, r.replications - r.degenerate);
    out << buf;
  }
}

}  // namespace pmtune
