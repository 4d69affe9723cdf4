// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "errors.hpp"
#include "rng.hpp"
#include "sv2f.hpp"

using namespace pmtune;

TEST_CASE("spliced exponential is continuous with growth below exp") {
  const double x0 = 5.0;
  CHECK(sexp(1.0, x0) == doctest::Approx(std::exp(1.0)));
  CHECK(sexp(x0 + 1e-9, x0) == doctest::Approx(std::exp(x0)).epsilon(1e-8));
  CHECK(sexp(x0 + 10.0, x0) < std::exp(x0 + 10.0) * 1e-3);
  CHECK(sexp(x0 + 3.0, x0) > sexp(x0 + 2.0, x0));
}

TEST_CASE("sv2f parameters round-trip through the unconstrained space") {
  const Sv2fModel m;
  const Sv2fModel back = sv2f_from_psi(sv2f_to_psi(m), m);
  const Eigen::VectorXd a = sv2f_theta(m), b = sv2f_theta(back);
  REQUIRE(a.size() == kSv2fParams);
  for (int i = 0; i < kSv2fParams; ++i) CHECK(b(i) == doctest::Approx(a(i)).epsilon(1e-12));
  Sv2fModel bad;
  bad.sigma1 = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("simulation is deterministic and finite") {
  const Sv2fModel m;
  const Sv2fData a = simulate_sv2f(m, 100, 11), b = simulate_sv2f(m, 100, 11);
  CHECK(a.y == b.y);
  for (double v : a.y) CHECK(std::isfinite(v));
  CHECK(a.v1.size() == 100u * (m.substeps + 1));
  std::ostringstream out;
  write_latent_csv(a, m.substeps, out);
  CHECK(out.str().rfind("t,substep,v1,v2\n", 0) == 0);
}

TEST_CASE("filter noise shrinks like 1/N") {
  const Sv2fModel m;
  const Sv2fData d = simulate_sv2f(m, 100, 3);
  auto var = [&](int n) {
    double s = 0.0, s2 = 0.0;
    const int reps = 300;
    for (int i = 0; i < reps; ++i) {
      const double v = sv2f_pf_loglik(m, d.y, n, derive_seed(4, i), ResampleScheme::systematic).value;
      REQUIRE(std::isfinite(v));
      s += v;
      s2 += v * v;
    }
    return s2 / reps - (s / reps) * (s / reps);
  };
  const double ratio = var(20) / var(80);
  CHECK(ratio > 2.5);
  CHECK(ratio < 8.0);  // small N sits above the 1/N line
}
