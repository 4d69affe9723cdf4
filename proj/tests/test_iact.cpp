// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "iact.hpp"
#include "rng.hpp"

using namespace pmtune;

namespace {

std::vector<double> ar1_series(double a, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  double v = rng.normal() / std::sqrt(1.0 - a * a);
  for (auto& e : x) {
    v = a * v + rng.normal();
    e = v;
  }
  return x;
}

}  // namespace

TEST_CASE("AR(1) inefficiency (1 + a) / (1 - a)") {
  for (double a : {0.0, 0.5, 0.9}) {
    const std::vector<double> x = ar1_series(a, 400000, 42);
    const double want = (1.0 + a) / (1.0 - a);
    const IfEstimate s = if_initial_sequence(x);
    const IfEstimate b = if_batch_means(x);
    CHECK(std::abs(s.value - want) < 4.0 * s.se + 0.02 * want);
    CHECK(std::abs(b.value - want) < 4.0 * b.se + 0.02 * want);
    // The two estimators agree within their joint 3 SE.
    CHECK(std::abs(s.value - b.value) <= 3.0 * std::hypot(s.se, b.se) + 1e-9);
  }
}

TEST_CASE("autocovariance at lag zero is the variance") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> c = autocovariance(x, 1);
  CHECK(c[0] == doctest::Approx(1.25));
  CHECK(c[1] == doctest::Approx((-1.5 * -0.5 + -0.5 * 0.5 + 0.5 * 1.5) / 4.0));
}

TEST_CASE("mean with se uses the inefficiency") {
  const std::vector<double> x = ar1_series(0.8, 200000, 3);
  const MeanEstimate m = mean_with_se(x);
  CHECK(std::abs(m.mean) < 5.0 * m.se);
  CHECK(m.if_value > 5.0);
  CHECK(estimate_if(x, IfMethod::batch_means).method == IfMethod::batch_means);
}
