// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gaussian_noise.hpp"
#include "noise_operator.hpp"
#include "normal.hpp"
#include "rng.hpp"

using namespace pmtune;

TEST_CASE("densities integrate to one and tilt by exp(z)") {
  const double s = 1.3;
  double g = 0.0, t = 0.0, h = 1e-3;
  for (double z = -15.0; z < 15.0; z += h) {
    g += noise_density(s, z) * h;
    t += tilted_density(s, z) * h;
    CHECK(tilted_density(s, z) == doctest::Approx(std::exp(z) * noise_density(s, z)).epsilon(1e-12));
  }
  CHECK(g == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(t == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("mean acceptance closed form against quadrature and simulation") {
  for (double s : {0.2, 0.92, 1.7, 3.0}) {
    CHECK(mean_accept_z(s) == doctest::Approx(2.0 * norm_cdf(-s / std::sqrt(2.0))).epsilon(1e-15));
    CHECK(std::abs(mean_accept_z(s) - mean_accept_z_quadrature(s)) < 1e-10);
  }
  Rng rng(3);
  const double s = 1.2;
  double acc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = sample_tilted(s, rng), w = sample_noise(s, rng);
    acc += std::min(1.0, std::exp(w - z));
  }
  CHECK(acc / n == doctest::Approx(mean_accept_z(s)).epsilon(0.01));
}

TEST_CASE("noise samplers have the stated moments") {
  Rng rng(11);
  const double s = 0.8;
  const int n = 200000;
  double m = 0.0, mt = 0.0, v = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = sample_noise(s, rng);
    m += z;
    v += z * z;
    mt += sample_tilted(s, rng);
  }
  m /= n;
  v = v / n - m * m;
  CHECK(std::abs(m + 0.5 * s * s) < 4.0 * s / std::sqrt(n));
  CHECK(std::abs(mt / n - 0.5 * s * s) < 4.0 * s / std::sqrt(n));
  CHECK(v == doctest::Approx(s * s).epsilon(0.02));
}

TEST_CASE("inverse acceptance integral: quadrature, truncation check, Monte Carlo") {
  const double s = 1.5;
  const QuadratureResult q = inv_accept_quadrature(s);
  CHECK(std::abs(q.value - q.widened_value) < 1e-9);
  CHECK(q.value == doctest::Approx(inv_accept_integral(s)));
  // pi_z(1/rho) by simulation: z ~ pi_z, rho = integral of min(1, e^{w-z}) g(w) dw.
  Rng rng(5);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += 1.0 / accept_rate_z(s, sample_tilted(s, rng));
  CHECK(sum / n == doctest::Approx(q.value).epsilon(0.03));
  // Jensen: pi_z(1/rho) >= 1/pi_z(rho).
  CHECK(q.value >= 1.0 / mean_accept_z(s));
}

TEST_CASE("functionals agree with the discrete noise kernel") {
  for (double s : {0.6, 1.4}) {
    const NoiseFunctionals nf = gaussian_functionals(s);
    const KernelFunctionals k = kernel_functionals(hermite_noise_kernel(s, 120));
    CHECK(k.mean_accept == doctest::Approx(nf.mean_accept).epsilon(2e-3));
    CHECK(k.inv_accept == doctest::Approx(nf.inv_accept).epsilon(1e-2));
    CHECK(k.phi1 == doctest::Approx(nf.phi1).epsilon(3e-2));
    CHECK(nf.if_z >= 1.0);
  }
}

TEST_CASE("lag-one autocorrelation against simulation of the jump chain") {
  Rng rng(17);
  const double s = 1.0;
  const McEstimate e = estimate_phi_n(s, 1, 200000, rng);
  CHECK(std::abs(e.value - gaussian_functionals(s).phi1) < 4.0 * e.se + 1e-3);
}

TEST_CASE("noise law table CSV header") {
  const NoiseLawTable t = build_table({0.5, 1.0}, 2000, 20, 9);
  std::ostringstream out;
  write_table_csv(t, out);
  CHECK(out.str().rfind("sigma,inv_accept,phi1,if_z,mc_samples,seed\n", 0) == 0);
}
