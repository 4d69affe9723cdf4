// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "calibrate.hpp"
#include "errors.hpp"
#include "rng.hpp"

using namespace pmtune;

namespace {

// Log-likelihood estimator whose error is exactly N(-s^2/2, s^2) with s^2 = c/N.
LogLikSampler gaussian_sampler(double c) {
  return [c](int n, Rng& rng) {
    const double s = std::sqrt(c / n);
    LogLikEstimate e;
    e.particles = n;
    e.value = -0.5 * s * s + s * rng.normal();
    return e;
  };
}

std::vector<double> gaussian_z(double s, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> z(n);
  for (auto& v : z) v = -0.5 * s * s + s * rng.normal();
  return z;
}

}  // namespace

TEST_CASE("exact 1/N data recover c and N*") {
  const std::vector<int> n = {10, 20, 40, 80};
  std::vector<double> s2;
  for (int k : n) s2.push_back(100.0 / k);
  const NChoice ch = fit_n_choice(n, s2, 1.0);
  CHECK(ch.c == doctest::Approx(100.0));
  CHECK(ch.slope == doctest::Approx(-1.0));
  CHECK(ch.r_squared == doctest::Approx(1.0));
  CHECK(ch.n_star == 100);
  CHECK_FALSE(ch.poor_fit);
  CHECK(fit_n_choice(n, s2, 0.92).n_star == static_cast<int>(std::ceil(100.0 / (0.92 * 0.92))));
  std::vector<double> s;
  for (double v : s2) s.push_back(std::sqrt(v));
  CHECK(variance_vs_inverse_n_r2(n, s) == doctest::Approx(1.0));
  CHECK(linear_fit_r2({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_n_choice({10}, {1.0}, 1.0), Error);
}

TEST_CASE("sigma estimate with a known reference") {
  const CalibrationRow r = estimate_sigma(gaussian_sampler(64.0), 64, 4000, 3, 0.0);
  CHECK(std::abs(r.sigma_hat - 1.0) < 4.0 * r.se);
  CHECK(std::abs(r.moments.d_mean) < 4.0);
  CHECK(r.degenerate == 0);
}

TEST_CASE("degenerate runs are excluded and counted") {
  LogLikSampler s = [](int n, Rng& rng) {
    LogLikEstimate e;
    e.particles = n;
    e.value = rng.uniform() < 0.1 ? -INFINITY : rng.normal();
    return e;
  };
  const CalibrationRow r = estimate_sigma(s, 10, 500, 4);
  CHECK(r.degenerate > 20);
  CHECK(static_cast<int>(r.z.size()) + r.degenerate == 500);
}

TEST_CASE("choose_n lands near c / sigma_target^2") {
  const NChoice ch = choose_n(gaussian_sampler(150.0), 1.0, 20, 320, 2000, 5, 0.0);
  CHECK(std::abs(ch.n_star - 150) <= 15);
  REQUIRE(ch.confirmation.has_value());
  CHECK(ch.confirmation->particles == ch.n_star);
  CHECK(ch.pilot.size() == 5u);
}

TEST_CASE("Z diagnostics under the lognormal noise law") {
  const double s = 0.9;
  const ZDiagnostics d = z_diagnostics(gaussian_z(s, 20000, 6), s);
  CHECK(std::abs(d.d_mean) < 4.0);
  CHECK(std::abs(d.d_var) < 4.0);
  CHECK(std::abs(d.d_m3) < 4.0);
  CHECK(std::abs(d.d_m4) < 4.0);
  CHECK(std::abs(d.d_shift) < 4.0);
  // A shifted mean is detected.
  std::vector<double> z = gaussian_z(s, 20000, 7);
  for (double& v : z) v += 0.1;
  CHECK(std::abs(z_diagnostics(z, s).d_shift) > 4.0);
  CHECK_THROWS_AS(z_diagnostics(std::vector<double>(10, 0.0)), Error);
}

TEST_CASE("tilted resampling shifts the mean by sigma^2") {
  const double s = 0.8;
  const TiltedSample t = tilted_sample(gaussian_z(s, 20000, 8), 20000, 9);
  double m = 0.0;
  for (double v : t.z) m += v / static_cast<double>(t.z.size());
  CHECK(m == doctest::Approx(0.5 * s * s).epsilon(0.1));
  CHECK(t.acceptance > 0.0);
}

TEST_CASE("calibration CSV header") {
  std::ostringstream out;
  write_calibration_csv({estimate_sigma(gaussian_sampler(10.0), 10, 200, 1, 0.0)}, out);
  CHECK(out.str().rfind("N,sigma_hat,se,mean_z,var_z,m3,m4,S\n", 0) == 0);
}
