// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <initializer_list>

#include "normal.hpp"

using namespace pmtune;

TEST_CASE("normal cdf against erfc") {
  for (double x : {-8.0, -3.0, -1.0, -0.1, 0.0, 0.5, 2.0, 6.0})
    CHECK(norm_cdf(x) == doctest::Approx(0.5 * std::erfc(-x / std::sqrt(2.0))).epsilon(1e-14));
}

TEST_CASE("log cdf stays finite deep in the lower tail") {
  // Mills-ratio asymptotics: log Phi(x) ~ -x^2/2 - log(-x) - log sqrt(2 pi).
  const double x = -60.0;
  const double approx = -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log1p(-1.0 / (x * x));
  CHECK(std::isfinite(log_norm_cdf(x)));
  CHECK(log_norm_cdf(x) == doctest::Approx(approx).epsilon(1e-6));
  CHECK(log_norm_cdf(-5.0) == doctest::Approx(std::log(norm_cdf(-5.0))).epsilon(1e-13));
  CHECK(log_norm_cdf(10.0) == doctest::Approx(-7.6198530241605e-24).epsilon(1e-6));
}

TEST_CASE("pdf and log_add_exp") {
  CHECK(norm_pdf(0.0) == doctest::Approx(kInvSqrt2Pi));
  CHECK(norm_log_pdf(1.0, 1.0, 2.0) == doctest::Approx(-kLogSqrt2Pi - std::log(2.0)));
  CHECK(log_add_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_add_exp(-INFINITY, 3.0) == 3.0);
}
