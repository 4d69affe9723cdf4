// SPDX-License-Identifier: Apache-2.0
//
// Acceptance criteria. Usage: acceptance <id>... (ids 1-12; none means all).
// One line per criterion: "criterion <id>: PASS|FAIL <details>".
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "calibrate.hpp"
#include "exact_oracle.hpp"
#include "gaussian_noise.hpp"
#include "iact.hpp"
#include "ssm.hpp"
#include "study_ar1.hpp"
#include "study_sv.hpp"

using namespace pmtune;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  // Records a check; the detail text lists every check with its outcome.
  void near(const std::string& what, double got, double want, double tol) {
    const bool ok = std::abs(got - want) <= tol;
    note(ok, what, got, "= " + num(want) + " +- " + num(tol));
  }
  void within(const std::string& what, double got, double lo, double hi) {
    const bool ok = got >= lo && got <= hi;
    note(ok, what, got, "in [" + num(lo) + ", " + num(hi) + "]");
  }
  void below(const std::string& what, double got, double bound) {
    note(got < bound, what, got, "< " + num(bound));
  }
  void check(bool ok, const std::string& what, const std::string& text) {
    pass = pass && ok;
    detail << (ok ? "" : "!") << what << " " << text << "; ";
  }
  void note(bool ok, const std::string& what, double got, const std::string& want) {
    check(ok, what, num(got) + " (" + want + ")");
  }
  static std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
  }
};

Verdict criterion1() {
  Verdict v;
  double worst = 0.0;
  for (int i = 1; i <= 12; ++i) {
    const double s = 0.25 * i;
    worst = std::max(worst, std::abs(mean_accept_z(s) - mean_accept_z_quadrature(s)));
  }
  v.below("max |closed form - quadrature|", worst, 1e-8);
  return v;
}

Verdict criterion2() {
  Verdict v;
  FunctionalSource src;
  const SigmaOptResult r = minimize_rct(BoundId::rct_perfect, 1.0, src);
  v.near("sigma_opt", r.sigma_opt, 0.92, 0.01);
  v.near("min", r.value_at_opt, 5.36, 0.02);
  v.near("rct_perfect(1.68)", rct_perfect(1.68), 12.73, 0.05);
  v.near("rct_perfect(1.2)", rct_perfect(1.2), 6.10, 0.02);
  return v;
}

Verdict criterion3() {
  Verdict v;
  FunctionalSource src;
  const SigmaOptResult r = minimize_rct(BoundId::lrct2, 1.0, src);
  v.near("sigma_opt", r.sigma_opt, 1.68, 0.01);
  v.near("min", r.value_at_opt, 1.51, 0.01);
  v.near("lrct2(0.92)", rct(lrif2(0.92), 0.92), 2.29, 0.01);
  v.near("lrct2(1.2)", rct(lrif2(1.2), 1.2), 1.75, 0.01);
  return v;
}

Verdict criterion4() {
  Verdict v;
  FunctionalSource src;
  v.near("urct2 sigma_opt (if_ex=1)", minimize_rct(BoundId::urct2, 1.0, src).sigma_opt, 0.92, 0.01);
  v.near("urct2 sigma_opt (if_ex=inf)", minimize_rct(BoundId::urct2, kInfiniteIf, src).sigma_opt, 1.02, 0.01);
  // The large-if_ex approach: the minimizer at a very large finite value.
  v.near("urct2 sigma_opt (if_ex=1e8)", minimize_rct(BoundId::urct2, 1e8, src).sigma_opt, 1.02, 0.01);
  v.near("mean_accept_z(0.92)", mean_accept_z(0.92), 0.51, 0.005);
  v.near("urif2(0.92, 1)", urif2(gaussian_functionals(0.92), 1.0), 4.54, 0.02);
  return v;
}

Verdict criterion5() {
  Verdict v;
  struct Row {
    double if_jump, rct_lo, rct_hi, sigma_lo, sigma_hi;
  };
  const std::vector<Row> table = {{1, 3.201, 5.327, 0.548, 1.572},
                                  {10, 2.020, 2.256, 1.018, 1.598},
                                  {25, 1.773, 1.876, 1.205, 1.658},
                                  {100, 1.595, 1.625, 1.421, 1.730},
                                  {1000, 1.518, 1.522, 1.607, 1.730}};
  const auto t0 = std::chrono::steady_clock::now();
  FunctionalSource src;
  for (const Row& want : table) {
    const SandwichRow got = sandwich_interval(want.if_jump, src);
    const double rct_tol = want.if_jump == 1000 ? 0.005 : 0.01;
    const std::string tag = "J=" + Verdict::num(want.if_jump) + " ";
    v.near(tag + "rct_lo", got.rct_lo, want.rct_lo, rct_tol);
    v.near(tag + "rct_hi", got.rct_hi, want.rct_hi, rct_tol);
    v.near(tag + "sigma_lo", got.sigma_lo, want.sigma_lo, 0.01);
    v.near(tag + "sigma_hi", got.sigma_hi, want.sigma_hi, 0.01);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.below("runtime s", secs, 60.0);
  return v;
}

Verdict criterion6() {
  Verdict v;
  const double s = golden_section_min(psi, 0.5, 5.0, 1e-7);
  v.near("psi sigma_opt", s, 2.00, 0.01);
  v.near("psi min", psi(s), 0.68, 0.01);
  v.near("psi(1.68)", psi(1.68), 0.72, 0.01);
  v.near("lrct2(2.00)", rct(lrif2(2.0), 2.0), 1.59, 0.01);
  double small_l = 0.0, large_l = 0.0;
  for (int i = 1; i <= 12; ++i) {
    const double x = 0.25 * i;
    small_l = std::max(small_l, std::abs(arif(x, 1e-4) / lrif2(x) - 1.0));
    large_l = std::max(large_l, std::abs(arct(x, 50.0) - psi(x)));
  }
  v.below("max |arif(l=1e-4) / lrif2 - 1|", small_l, 1e-3);
  v.below("max |arct(l=50) - psi|", large_l, 1e-2);
  return v;
}

Verdict criterion7() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  for (ProposalFamily fam : {ProposalFamily::zero_diagonal, ProposalFamily::gram}) {
    BatteryOptions o;
    o.count = 100;
    o.seed = derive_seed(kSeed, static_cast<std::uint64_t>(fam));
    o.spec.family = fam;
    const BatteryResult r = run_battery(o);
    const std::string tag = fam == ProposalFamily::gram ? "gram " : "zero_diag ";
    v.check(r.passed == r.count, tag + "specs passing", std::to_string(r.passed) + "/" + std::to_string(r.count));
    v.below(tag + "theorem residual", r.worst_theorem, 1e-10);
    v.below(tag + "tensor residual", r.worst_tensor, 1e-12);
    v.below(tag + "prop2 residual", r.worst_prop2, 1e-10);
    v.check(r.worst_peskun >= -1e-12, tag + "IF(Q) <= IF(Q*)", "worst gap " + Verdict::num(r.worst_peskun));
    v.check(r.bound_failures == 0, tag + "bound failures", std::to_string(r.bound_failures));
    if (fam == ProposalFamily::gram)
      v.check(r.lrif1_applicable == r.count && r.urif2_applicable == r.count, tag + "full lattice applicable",
              std::to_string(std::min(r.lrif1_applicable, r.urif2_applicable)) + "/" + std::to_string(r.count));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.below("runtime s", secs, 120.0);
  return v;
}

// Mean of p-hat / p over replications with its Monte Carlo standard error.
std::pair<double, double> likelihood_ratio_mean(const Ar1Model& m, const std::vector<double>& y, Ar1Filter kind) {
  const double exact = kalman_loglik(m, y);
  std::vector<double> w(2000);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = std::exp(pf_loglik(m, y, 100, derive_seed(kSeed, i), kind, ResampleScheme::multinomial).value - exact);
  double mean = 0.0;
  for (double x : w) mean += x / static_cast<double>(w.size());
  double var = 0.0;
  for (double x : w) var += (x - mean) * (x - mean) / static_cast<double>(w.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(w.size()))};
}

Verdict criterion8() {
  Verdict v;
  const Ar1Model m;
  const Ar1Data d = simulate_ar1(m, 300, 7);
  // The AR(1) filter used throughout the studies; multinomial resampling.
  const auto [mean, se] = likelihood_ratio_mean(m, d.y, Ar1Filter::fully_adapted);
  v.near("mean p-hat/p (fully adapted)", mean, 1.0, 3.0 * se);
  // Reported only: with log-noise sd near 2 the sample mean of a lognormal is
  // dominated by rare draws and its SE is unreliable.
  const auto [bmean, bse] = likelihood_ratio_mean(m, d.y, Ar1Filter::bootstrap);
  v.note(true, "bootstrap mean p-hat/p", bmean, "se " + Verdict::num(bse) + ", informational");
  return v;
}

Verdict criterion9() {
  Verdict v;
  Ar1StudyOptions o;
  o.seed = kSeed;
  const Ar1Setup setup = ar1_setup(o);
  const std::vector<CalibrationRow> rows = ar1_sigma_rows(o, setup, o.n_grid, derive_seed(kSeed, 200));
  std::vector<int> n;
  std::vector<double> s;
  double s60 = NAN;
  for (const CalibrationRow& r : rows) {
    n.push_back(r.particles);
    s.push_back(r.sigma_hat);
    if (r.particles == 60) s60 = r.sigma_hat;
  }
  v.within("R^2 sigma^2 vs 1/N", variance_vs_inverse_n_r2(n, s), 0.95, 1.0);
  v.near("sigma(N=60)", s60, 0.92, 0.08);
  return v;
}

// Criteria 10 and 11 share one study over rho in {0, 0.9}.
const Ar1Study& ar1_study() {
  static std::optional<Ar1Study> study;
  if (!study) {
    Ar1StudyOptions o;
    o.seed = kSeed;
    o.rho_grid = {0.0, 0.9};
    o.progress = [](const std::string& m) { std::fprintf(stderr, "[ar1] %s\n", m.c_str()); };
    study = run_ar1_study(o);
  }
  return *study;
}

double rct_spread(const Ar1Study& st, double rho) {
  double lo = INFINITY, hi = 0.0;
  for (const Ar1Cell& c : st.cells)
    if (c.rho == rho && c.sigma >= 0.9 && c.sigma <= 1.7) {
      lo = std::min(lo, c.rct_mean);
      hi = std::max(hi, c.rct_mean);
    }
  return hi / lo;
}

Verdict criterion10() {
  Verdict v;
  const Ar1Study& st = ar1_study();
  const Ar1ExactResult& ex = st.exact.front();
  const double paper[kAr1Params] = {2.58, 2.50, 2.42};
  const char* names[kAr1Params] = {"phi", "mu_x", "sigma_x"};
  for (int j = 0; j < kAr1Params; ++j)
    v.within(std::string("IF_ex(") + names[j] + ")", ex.if_ex[j].value, 0.75 * paper[j], 1.25 * paper[j]);
  const int best = ar1_ct_argmin(st, 0.0);
  v.check(best == 43 || best == 60, "CT argmin N", std::to_string(best) + " (in {43, 60})");
  bool bound_ok = true;
  for (const Ar1Cell& c : st.cells) {
    if (c.rho != 0.0) continue;
    if (c.particles == 60) v.near("acceptance(N=60)", c.acceptance, 0.459, 0.03);
    if (c.acceptance < c.acceptance_bound - 2.0 * c.acceptance_se) {
      bound_ok = false;
      v.check(false, "acceptance bound N=" + std::to_string(c.particles),
              Verdict::num(c.acceptance) + " < " + Verdict::num(c.acceptance_bound) + " - 2 SE");
    }
  }
  if (bound_ok) v.check(true, "acceptance >= bound - 2 SE", "all N");
  return v;
}

Verdict criterion11() {
  Verdict v;
  const Ar1Study& st = ar1_study();
  const int best = ar1_ct_argmin(st, 0.9);
  v.check(best == 22 || best == 31 || best == 43, "CT argmin N", std::to_string(best) + " (in {22, 31, 43})");
  for (const Ar1Cell& c : st.cells)
    if (c.rho == 0.9 && c.particles == best) v.note(true, "sigma at argmin", c.sigma, "reported");
  const double r0 = rct_spread(st, 0.0), r9 = rct_spread(st, 0.9);
  v.check(r9 < r0, "RCT max/min on [0.9, 1.7]", "rho=0.9 " + Verdict::num(r9) + " < rho=0 " + Verdict::num(r0));
  return v;
}

Verdict criterion12() {
  Verdict v;
  SvStudyOptions o;
  o.seed = kSeed;
  o.progress = [](const std::string& m) { std::fprintf(stderr, "[sv] %s\n", m.c_str()); };
  const SvStudy st = run_sv_study(o);
  v.note(true, "N*", st.choice.n_star, "calibrated");
  v.within("Z mean check (var + 2 mean)/SE", st.calibrated.moments.d_shift, -4.0, 4.0);
  v.within("Z variance vs c/N* (SE)", st.var_discrepancy, -4.0, 4.0);
  for (int j = 0; j < kSv2fParams; ++j) {
    const IfEstimate& q = st.q.if_theta[j];
    const IfEstimate& p = st.proxy.if_theta[j];
    const double se = std::hypot(q.se, p.se);
    v.check(q.value + 3.0 * se >= p.value, std::string("IF ") + sv2f_param_name(j),
            Verdict::num(q.value) + " vs proxy " + Verdict::num(p.value) + " (3 SE " + Verdict::num(3.0 * se) + ")");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Verdict()>> criteria = {
      {1, criterion1},  {2, criterion2},  {3, criterion3},   {4, criterion4},   {5, criterion5},   {6, criterion6},
      {7, criterion7},  {8, criterion8},  {9, criterion9},   {10, criterion10}, {11, criterion11}, {12, criterion12}};
  std::set<int> ids;
  for (int i = 1; i < argc; ++i) ids.insert(std::atoi(argv[i]));
  if (ids.empty())
    for (const auto& [id, fn] : criteria) ids.insert(id);
  int failed = 0;
  for (int id : ids) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("criterion %d: FAIL unknown criterion\n", id);
      ++failed;
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = it->second();
    } catch (const std::exception& e) {
      v.check(false, "exception", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s %s[%.1f s]\n", id, v.pass ? "PASS" : "FAIL", v.detail.str().c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
