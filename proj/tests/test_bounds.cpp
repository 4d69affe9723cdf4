// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "bounds.hpp"
#include "errors.hpp"
#include "gaussian_noise.hpp"

using namespace pmtune;

TEST_CASE("urif2 at if_ex = 1 is the perfect-proposal RIF") {
  for (double s : {0.5, 0.92, 2.0}) {
    const NoiseFunctionals nf = gaussian_functionals(s);
    CHECK(urif2(nf, 1.0) == doctest::Approx(2.0 * nf.inv_accept - 1.0));
    CHECK(rct(urif2(nf, 1.0), s) == doctest::Approx(rct_perfect(s)));
  }
}

TEST_CASE("finite inefficiencies approach the limiting forms") {
  const NoiseFunctionals nf = gaussian_functionals(1.3);
  for (auto f : {urif1, urif2}) CHECK(f(nf, 1e9) == doctest::Approx(f(nf, kInfiniteIf)).epsilon(1e-8));
  for (auto f : {urif3, urif4, lrif1}) CHECK(f(nf, 1e9) == doctest::Approx(f(nf, kInfiniteIf)).epsilon(1e-8));
  CHECK(lrif1(nf, kInfiniteIf) == doctest::Approx(lrif2(nf)));
  CHECK(lrif2(nf) == doctest::Approx(lrif2(1.3)));
}

TEST_CASE("lower bounds sit below upper bounds") {
  for (double s = 0.2; s < 3.0; s += 0.2) {
    const NoiseFunctionals nf = gaussian_functionals(s);
    for (double j : {1.0, 3.0, 30.0, 500.0}) {
      CHECK(lrif2(nf) <= lrif1(nf, j) + 1e-12);
      CHECK(lrif1(nf, j) <= urif3(nf, j) + 1e-12);
      CHECK(lrif1(nf, j) <= urif4(nf, j) + 1e-12);
    }
  }
}

TEST_CASE("profile validation") {
  CHECK_THROWS_AS(ExactChainProfile::make(0.5, 0.5), Error);
  CHECK_THROWS_AS(ExactChainProfile::make(3.0, 4.0), Error);
  const ExactChainProfile p = ExactChainProfile::make(4.0, 2.0);
  const BoundSet b = evaluate_bounds(gaussian_functionals(1.0), p);
  CHECK(b.urct3 == doctest::Approx(b.urif3));
  CHECK(b.lrct2 == doctest::Approx(1.0 / mean_accept_z(1.0)));
  CHECK_THROWS_AS(rct(1.0, 0.0), Error);
}

TEST_CASE("bound names round-trip") {
  for (BoundId id : {BoundId::urct1, BoundId::urct2, BoundId::urct3, BoundId::urct4, BoundId::lrct1, BoundId::lrct2,
                     BoundId::rct_perfect})
    CHECK(parse_bound(bound_name(id)) == id);
  CHECK_FALSE(parse_bound("urct9").has_value());
}

TEST_CASE("golden section finds a known minimum") {
  const double x = golden_section_min([](double t) { return (t - 1.234) * (t - 1.234) + 2.0; }, 0.0, 5.0, 1e-8);
  CHECK(x == doctest::Approx(1.234).epsilon(1e-6));
}

TEST_CASE("minimizer of rct on a custom functional source") {
  // Constant functionals make RIF constant, so RCT = c / sigma^2 decreases to the bracket edge.
  FunctionalSource src([](double s) {
    NoiseFunctionals nf;
    nf.sigma = s;
    nf.mean_accept = 0.5;
    nf.inv_accept = 3.0;
    return nf;
  });
  const SigmaOptResult r = minimize_rct(BoundId::lrct2, 1.0, src, {0.5, 2.0});
  CHECK(r.at_boundary);
  CHECK(r.sigma_opt == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(r.value_at_opt == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("sandwich rows are nested in the jump-chain inefficiency") {
  FunctionalSource src;
  const SandwichRow a = sandwich_interval(25.0, src), b = sandwich_interval(50.0, src),
                    c = sandwich_interval(100.0, src);
  // Intervals tighten: rct endpoints decrease and the sigma lower end increases.
  CHECK(c.rct_lo <= b.rct_lo);
  CHECK(b.rct_lo <= a.rct_lo);
  CHECK(c.rct_hi <= b.rct_hi);
  CHECK(b.rct_hi <= a.rct_hi);
  CHECK(a.sigma_lo <= b.sigma_lo);
  CHECK(b.sigma_lo <= c.sigma_lo);
  // Endpoints of the sigma interval: lrct1 equals the best upper minimum.
  const double lrct1_lo = bound_rct(BoundId::lrct1, gaussian_functionals(b.sigma_lo), 50.0);
  CHECK(lrct1_lo == doctest::Approx(b.rct_hi).epsilon(1e-6));
}

TEST_CASE("psi has its minimum at sigma = 2 with value e/4") {
  const double s = golden_section_min(psi, 0.5, 5.0, 1e-9);
  CHECK(s == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(psi(2.0) == doctest::Approx(std::exp(1.0) / 4.0));
}

TEST_CASE("arif limits in the jump size") {
  for (double s : {0.3, 1.0, 2.5}) {
    CHECK(arif(s, 1e-6) == doctest::Approx(lrif2(s)).epsilon(1e-5));
    CHECK(arif(s, 200.0) == doctest::Approx(std::exp(0.25 * s * s)).epsilon(1e-3));
    CHECK(arct(s, 1.0) == doctest::Approx(arif(s, 1.0) / (s * s)));
    // Decreasing in l from lrif2 towards exp(sigma^2 / 4).
    CHECK(arif(s, 0.5) >= arif(s, 2.0));
  }
  CHECK_THROWS_AS(arif(1.0, 0.0), Error);
  CHECK(arif(0.0, 1.0) == doctest::Approx(1.0));
}
