// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "exact_oracle.hpp"

using namespace pmtune;

TEST_CASE("two-state chain inefficiency (1 + lambda) / (1 - lambda)") {
  const double a = 0.3, b = 0.1;
  Eigen::MatrixXd p(2, 2);
  p << 1 - a, a, b, 1 - b;
  Eigen::VectorXd pi(2);
  pi << b / (a + b), a / (a + b);
  Eigen::VectorXd h(2);
  h << 1.0, 0.0;
  const double lambda = 1.0 - a - b;
  CHECK(exact_if(p, pi, h).value == doctest::Approx((1 + lambda) / (1 - lambda)).epsilon(1e-12));
}

TEST_CASE("reducible and periodic kernels are rejected") {
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(2, 0.5), h(2);
  h << 1.0, -1.0;
  try {
    exact_if(Eigen::MatrixXd::Identity(2, 2), pi, h);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::reducible);
  }
  Eigen::MatrixXd flip(2, 2);
  flip << 0, 1, 1, 0;
  try {
    exact_if(flip, pi, h);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::periodic);
  }
}

TEST_CASE("MH matrix is stochastic and reversible with respect to pi") {
  const RandomSpec rs = random_spec(5);
  const MhKernel k = build_mh_matrix(rs.spec);
  const Eigen::MatrixXd p = k.transition();
  CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
  const Eigen::MatrixXd flow = k.stationary.asDiagonal() * p;
  CHECK((flow - flow.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((k.stationary - rs.spec.pi).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("jump kernels are stochastic") {
  const RandomSpec rs = random_spec(6, {.family = ProposalFamily::gram});
  const PmKernels k = build_pm_matrices(rs.spec);
  for (const MhKernel* m : {&k.q, &k.qstar}) {
    const JumpKernel j = jump_matrix(*m);
    CHECK((j.matrix.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(j.matrix.minCoeff() >= 0.0);
    CHECK((j.stationary.transpose() * j.matrix - j.stationary.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("identities hold on a random spec") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const RandomSpec rs = random_spec(seed);
    const TheoremOneTerms t = verify_theorem1(rs.spec, rs.h);
    CHECK(t.residual < 1e-10);
    CHECK(t.tensor_residual < 1e-12);
    CHECK(t.prop2_residual < 1e-10);
    CHECK(t.peskun_gap >= -1e-12);
    CHECK(t.beta == doctest::Approx(t.beta_series).epsilon(1e-8));
    CHECK(t.gamma == doctest::Approx(t.gamma_alt).epsilon(1e-8));
  }
}

TEST_CASE("gram family makes the full bound lattice applicable") {
  const RandomSpec rs = random_spec(9, {.family = ProposalFamily::gram});
  const TheoremOneTerms t = verify_theorem1(rs.spec, rs.h);
  const BoundReport b = verify_bounds(rs.spec, rs.h, t);
  CHECK(b.positive_jump_ex);
  CHECK(b.ok);
  CHECK(b.lrif2 <= b.lrif1 + 1e-12);
  CHECK(b.lrif1 <= b.rif_qstar + 1e-12);
  CHECK(b.rif_qstar <= std::min({b.urif1, b.urif2, b.urif3, b.urif4}) + 1e-12);
}

TEST_CASE("failing specs serialize with the reproduction fields") {
  const RandomSpec rs = random_spec(4);
  const nlohmann::json j = spec_to_json(rs.spec, rs.h, rs.seed);
  for (const char* k : {"theta_weights", "proposal_rows", "z_nodes", "z_weights", "sigma", "h_values", "seed"})
    CHECK(j.contains(k));
}

TEST_CASE("small battery passes") {
  BatteryOptions o;
  o.count = 10;
  const BatteryResult r = run_battery(o);
  CHECK(r.passed == 10);
  CHECK(r.failures.empty());
}
