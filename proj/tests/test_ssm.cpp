// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "errors.hpp"
#include "normal.hpp"
#include "rng.hpp"
#include "ssm.hpp"

using namespace pmtune;

namespace {

// Dense multivariate normal log density of y under the AR(1)-plus-noise model.
double dense_loglik(const Ar1Model& m, const std::vector<double>& y) {
  const int T = static_cast<int>(y.size());
  Eigen::MatrixXd c(T, T);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < T; ++j) c(i, j) = m.sigma_x2 * std::pow(m.phi, std::abs(i - j)) + (i == j ? m.sigma_eps2 : 0);
  Eigen::VectorXd r(T);
  for (int i = 0; i < T; ++i) r(i) = y[i] - m.mu_x;
  const Eigen::LLT<Eigen::MatrixXd> llt(c);
  const Eigen::MatrixXd l = llt.matrixL();
  return -0.5 * r.dot(llt.solve(r)) - l.diagonal().array().log().sum() - T * kLogSqrt2Pi;
}

}  // namespace

TEST_CASE("Kalman log-likelihood against the dense Gaussian density") {
  Ar1Model m;
  m.phi = 0.6;
  const Ar1Data d = simulate_ar1(m, 25, 3);
  CHECK(kalman_loglik(m, d.y) == doctest::Approx(dense_loglik(m, d.y)).epsilon(1e-12));
  const std::vector<double> one = {0.7};
  CHECK(kalman_loglik(m, one) == doctest::Approx(norm_log_pdf(0.7, m.mu_x, std::sqrt(m.sigma_x2 + m.sigma_eps2))));
}

TEST_CASE("transformed parameters round-trip") {
  Ar1Model m;
  m.phi = -0.4;
  m.mu_x = 1.5;
  m.sigma_x2 = 2.0;
  const Ar1Model back = ar1_from_psi(ar1_to_psi(m), m.sigma_eps2);
  CHECK(back.phi == doctest::Approx(m.phi));
  CHECK(back.mu_x == doctest::Approx(m.mu_x));
  CHECK(back.sigma_x2 == doctest::Approx(m.sigma_x2));
  m.phi = 1.0;
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("particle filters are unbiased for the likelihood") {
  const Ar1Model m;
  const Ar1Data d = simulate_ar1(m, 50, 4);
  const double exact = kalman_loglik(m, d.y);
  for (Ar1Filter f : {Ar1Filter::bootstrap, Ar1Filter::fully_adapted})
    for (ResampleScheme s : {ResampleScheme::multinomial, ResampleScheme::systematic}) {
      const int n = 2000;
      double sum = 0.0, sq = 0.0;
      for (int i = 0; i < n; ++i) {
        const double w = std::exp(pf_loglik(m, d.y, 30, derive_seed(77, i), f, s).value - exact);
        sum += w;
        sq += w * w;
      }
      const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / n);
      CHECK(std::abs(mean - 1.0) < 4.0 * se);
    }
}

TEST_CASE("full adaptation reduces the noise") {
  const Ar1Model m;
  const Ar1Data d = simulate_ar1(m, 100, 5);
  auto spread = [&](Ar1Filter f) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double v = pf_loglik(m, d.y, 50, derive_seed(1, i), f, ResampleScheme::systematic).value;
      s += v;
      s2 += v * v;
    }
    return s2 / 200 - (s / 200) * (s / 200);
  };
  CHECK(spread(Ar1Filter::fully_adapted) < spread(Ar1Filter::bootstrap));
}

TEST_CASE("resampling offspring counts") {
  std::vector<double> lw = {std::log(0.1), std::log(0.2), std::log(0.3), std::log(0.4)};
  const std::vector<int> idx = resample(lw, ResampleScheme::systematic, 9);
  int count[4] = {0, 0, 0, 0};
  for (int i : idx) ++count[i];
  // Systematic resampling keeps each count within one of N w_i = (0.4, 0.8, 1.2, 1.6).
  CHECK(count[0] <= 1);
  CHECK(count[1] <= 1);
  CHECK((count[2] == 1 || count[2] == 2));
  CHECK((count[3] == 1 || count[3] == 2));
  Rng rng(1);
  double hits = 0.0;
  for (int r = 0; r < 20000; ++r)
    for (int i : resample(lw, ResampleScheme::multinomial, rng)) hits += i == 3;
  CHECK(hits / (20000.0 * 4.0) == doctest::Approx(0.4).epsilon(0.02));
}

TEST_CASE("dataset CSV and determinism") {
  const Ar1Data a = simulate_ar1(Ar1Model{}, 10, 8), b = simulate_ar1(Ar1Model{}, 10, 8);
  CHECK(a.y == b.y);
  std::ostringstream out;
  write_series_csv(a.y, out);
  CHECK(out.str().rfind("t,y\n", 0) == 0);
}
