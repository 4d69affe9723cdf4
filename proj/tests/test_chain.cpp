// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "chain.hpp"
#include "exact_oracle.hpp"
#include "iact.hpp"

using namespace pmtune;

namespace {

TargetSpec std_normal() {
  TargetSpec t;
  t.dim = 1;
  t.log_density = [](const Eigen::VectorXd& x) { return -0.5 * x.squaredNorm(); };
  return t;
}

ChainOptions opts(std::size_t n, std::uint64_t seed) {
  ChainOptions o;
  o.n = n;
  o.seed = seed;
  o.init = Eigen::VectorXd::Zero(1);
  return o;
}

ProposalSpec rw(double s) { return random_walk_t(Eigen::MatrixXd::Constant(1, 1, s)); }

}  // namespace

TEST_CASE("exact chain leaves the target invariant") {
  const Trace t = run_exact_chain(std_normal(), rw(2.0), opts(200000, 1));
  const MeanEstimate m = mean_with_se(t.column(0));
  CHECK(std::abs(m.mean) < 4.0 * m.se);
  std::vector<double> sq = t.column(0);
  for (double& v : sq) v = v * v;
  const MeanEstimate m2 = mean_with_se(sq);
  CHECK(std::abs(m2.mean - 1.0) < 4.0 * m2.se);
}

TEST_CASE("pseudo-marginal chains: z marginal of the accepted state is the tilted law") {
  const double s = 1.2;
  for (int k = 0; k < 2; ++k) {
    const Trace t = k == 0 ? run_pm_chain_gaussian(std_normal(), rw(2.0), s, opts(200000, 2))
                           : run_qstar_chain(std_normal(), rw(2.0), s, opts(200000, 2));
    const MeanEstimate m = mean_with_se(t.z);
    CHECK(std::abs(m.mean - 0.5 * s * s) < 4.0 * m.se);
    std::vector<double> d = t.z;
    for (double& v : d) v = (v - 0.5 * s * s) * (v - 0.5 * s * s);
    const MeanEstimate v = mean_with_se(d);
    CHECK(std::abs(v.mean - s * s) < 4.0 * v.se);
  }
}

TEST_CASE("empirical Peskun ordering IF(Q_EX) <= IF(Q) <= IF(Q*)") {
  for (double s : {0.5, 1.0, 1.5}) {
    const IfEstimate ex = estimate_if(run_exact_chain(std_normal(), rw(2.0), opts(300000, 3)).column(0));
    const IfEstimate q = estimate_if(run_pm_chain_gaussian(std_normal(), rw(2.0), s, opts(300000, 4)).column(0));
    const IfEstimate qs = estimate_if(run_qstar_chain(std_normal(), rw(2.0), s, opts(300000, 5)).column(0));
    CHECK(ex.value <= q.value + 3.0 * std::hypot(ex.se, q.se));
    CHECK(q.value <= qs.value + 3.0 * std::hypot(q.se, qs.se));
  }
}

TEST_CASE("jump chain round trip") {
  const Trace t = run_pm_chain_gaussian(std_normal(), rw(1.0), 1.0, opts(5000, 6));
  const JumpTrace j = to_jump_chain(t);
  CHECK(std::accumulate(j.sojourn.begin(), j.sojourn.end(), std::size_t{0}) == t.size());
  const std::vector<std::size_t> idx = expand_jump_chain(j);
  REQUIRE(idx.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.theta_at(idx[i], 0) == t.theta_at(i, 0));
}

TEST_CASE("identical seeds give identical traces") {
  const Trace a = run_pm_chain_gaussian(std_normal(), rw(1.0), 1.0, opts(2000, 7));
  const Trace b = run_pm_chain_gaussian(std_normal(), rw(1.0), 1.0, opts(2000, 7));
  CHECK(a.theta == b.theta);
  CHECK(a.z == b.z);
  std::ostringstream out;
  write_trace_csv(a, out);
  CHECK(out.str().rfind("iter,accepted,z,theta_1\n", 0) == 0);
}

TEST_CASE("estimator chain rejects -inf estimates and counts them") {
  TargetSpec prior = std_normal();
  LogLikEstimator est = [](const Eigen::VectorXd& x, Rng&) {
    return x(0) > 1.0 ? -std::numeric_limits<double>::infinity() : 0.0;
  };
  const Trace t = run_pm_chain_estimator(prior, est, rw(1.5), opts(20000, 8));
  CHECK(t.infinite_estimates > 0);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.theta_at(i, 0) <= 1.0);
}

TEST_CASE("autoregressive proposal validation") {
  CHECK_THROWS(autoregressive_t(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), 1.0).validate(1));
  CHECK_NOTHROW(autoregressive_t(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), 0.5).validate(1));
}

TEST_CASE("finite chain simulation matches the exact inefficiency") {
  const RandomSpec rs = random_spec(21);
  const PmKernels k = build_pm_matrices(rs.spec);
  Eigen::VectorXd h(rs.spec.k() * rs.spec.m());
  for (int i = 0; i < rs.spec.k(); ++i)
    for (int j = 0; j < rs.spec.m(); ++j) h(i * rs.spec.m() + j) = rs.h(i);
  const double exact = exact_if(k.q.transition(), k.q.stationary, h).value;
  const Trace t = run_finite_chain(rs.spec, KernelId::q, 400000, 9);
  std::vector<double> hs;
  for (int s : t.state) hs.push_back(h(s));
  const IfEstimate e = estimate_if(hs);
  CHECK(std::abs(e.value - exact) < 4.0 * e.se + 0.02 * exact);
}
