// SPDX-License-Identifier: Apache-2.0
#include "bounds.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "errors.hpp"
#include "normal.hpp"

namespace pmtune {
namespace {

double gap(const NoiseFunctionals& nf) { return nf.inv_accept - 1.0 / nf.mean_accept; }

// The formulas are well defined for any positive inefficiency; the >= 1
// requirement of the stated results is enforced by ExactChainProfile::make.
void check_if(double v, const char* name) {
  require(v > 0.0, ErrorCode::domain, std::string(name) + " must be positive");
}

}  // namespace

ExactChainProfile ExactChainProfile::make(double if_ex, double if_jump) {
  require(if_ex >= 1.0 && if_jump >= 1.0, ErrorCode::domain, "if_ex and if_jump must be >= 1");
  require(if_jump <= if_ex, ErrorCode::domain, "if_jump must not exceed if_ex");
  return {if_ex, if_jump};
}

double urif1(const NoiseFunctionals& nf, double if_ex) {
  check_if(if_ex, "if_ex");
  const double core = nf.inv_accept + (1.0 - nf.phi1) * gap(nf);
  if (std::isinf(if_ex)) return core;
  return (1.0 + 1.0 / if_ex) * core - 1.0 / if_ex;
}

double urif2(const NoiseFunctionals& nf, double if_ex) {
  check_if(if_ex, "if_ex");
  if (std::isinf(if_ex)) return nf.inv_accept;
  return (1.0 + 1.0 / if_ex) * nf.inv_accept - 1.0 / if_ex;
}

double urif3(const NoiseFunctionals& nf, double if_jump) {
  check_if(if_jump, "if_jump");
  const double inv_a = 1.0 / nf.mean_accept;
  const double lead = inv_a + nf.phi1 * gap(nf);
  if (std::isinf(if_jump)) return lead;
  return (1.0 + 1.0 / if_jump) * lead + 2.0 * gap(nf) * (1.0 - nf.phi1) / if_jump - 1.0 / if_jump;
}

double urif4(const NoiseFunctionals& nf, double if_jump) {
  check_if(if_jump, "if_jump");
  const double inv_a = 1.0 / nf.mean_accept;
  if (std::isinf(if_jump)) return inv_a;
  return (1.0 + 1.0 / if_jump) / (1.0 + if_jump) * gap(nf) * (1.0 + nf.if_z) + inv_a + (inv_a - 1.0) / if_jump;
}

double lrif1(const NoiseFunctionals& nf, double if_jump) {
  check_if(if_jump, "if_jump");
  const double inv_a = 1.0 / nf.mean_accept;
  if (std::isinf(if_jump)) return inv_a;
  return inv_a + 2.0 / (1.0 + if_jump) * gap(nf);
}

double lrif2(const NoiseFunctionals& nf) { return 1.0 / nf.mean_accept; }

double lrif2(double sigma) { return 1.0 / mean_accept_z(sigma); }

double rct(double rif, double sigma) {
  require(sigma > 0.0, ErrorCode::domain, "rct needs sigma > 0");
  return rif / (sigma * sigma);
}

double rct_perfect(const NoiseFunctionals& nf) { return rct(2.0 * nf.inv_accept - 1.0, nf.sigma); }

double rct_perfect(double sigma) { return rct(2.0 * inv_accept_integral(sigma) - 1.0, sigma); }

BoundSet evaluate_bounds(const NoiseFunctionals& nf, const ExactChainProfile& p) {
  BoundSet b;
  b.sigma = nf.sigma;
  b.urif1 = urif1(nf, p.if_ex);
  b.urif2 = urif2(nf, p.if_ex);
  b.urif3 = urif3(nf, p.if_jump);
  b.urif4 = urif4(nf, p.if_jump);
  b.lrif1 = lrif1(nf, p.if_jump);
  b.lrif2 = lrif2(nf);
  if (nf.sigma > 0.0) {
    const double s2 = nf.sigma * nf.sigma;
    b.urct1 = b.urif1 / s2;
    b.urct2 = b.urif2 / s2;
    b.urct3 = b.urif3 / s2;
    b.urct4 = b.urif4 / s2;
    b.lrct1 = b.lrif1 / s2;
    b.lrct2 = b.lrif2 / s2;
  }
  return b;
}

std::string_view bound_name(BoundId id) {
  switch (id) {
    case BoundId::urct1: return "urct1";
    case BoundId::urct2: return "urct2";
    case BoundId::urct3: return "urct3";
    case BoundId::urct4: return "urct4";
    case BoundId::lrct1: return "lrct1";
    case BoundId::lrct2: return "lrct2";
    case BoundId::rct_perfect: return "rct_perfect";
  }
  return "?";
}

std::optional<BoundId> parse_bound(std::string_view name) {
  for (BoundId id : {BoundId::urct1, BoundId::urct2, BoundId::urct3, BoundId::urct4, BoundId::lrct1, BoundId::lrct2,
                     BoundId::rct_perfect})
    if (bound_name(id) == name) return id;
  return std::nullopt;
}

std::string_view bound_parameter(BoundId id) {
  switch (id) {
    case BoundId::urct1:
    case BoundId::urct2: return "if_ex";
    case BoundId::urct3:
    case BoundId::urct4:
    case BoundId::lrct1: return "if_jump";
    default: return "";
  }
}

double bound_rct(BoundId id, const NoiseFunctionals& nf, double if_param) {
  double rif = 0.0;
  switch (id) {
    case BoundId::urct1: rif = urif1(nf, if_param); break;
    case BoundId::urct2: rif = urif2(nf, if_param); break;
    case BoundId::urct3: rif = urif3(nf, if_param); break;
    case BoundId::urct4: rif = urif4(nf, if_param); break;
    case BoundId::lrct1: rif = lrif1(nf, if_param); break;
    case BoundId::lrct2: rif = lrif2(nf); break;
    case BoundId::rct_perfect: rif = 2.0 * nf.inv_accept - 1.0; break;
  }
  return rct(rif, nf.sigma);
}

FunctionalSource::FunctionalSource() : fn_(gaussian_functionals) {}

FunctionalSource::FunctionalSource(Fn fn) : fn_(std::move(fn)) {}

NoiseFunctionals FunctionalSource::operator()(double sigma) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(sigma); it != cache_.end()) return it->second;
  }
  NoiseFunctionals nf = fn_(sigma);
  std::lock_guard lock(mutex_);
  cache_.emplace(sigma, nf);
  return nf;
}

double golden_section_min(const std::function<double(double)>& f, double a, double b, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

SigmaOptResult minimize_rct(BoundId id, double if_param, FunctionalSource& source, Bracket bracket, double tol,
                            double curve_step) {
  require(bracket.lo > 0.0 && bracket.hi > bracket.lo, ErrorCode::domain, "invalid sigma bracket");
  require(tol > 0.0 && curve_step > 0.0, ErrorCode::domain, "tol and curve_step must be positive");
  SigmaOptResult r;
  r.bound = id;
  r.if_param = if_param;
  auto value = [&](double s) { return bound_rct(id, source(s), if_param); };
  const int n = static_cast<int>(std::floor((bracket.hi - bracket.lo) / curve_step + 1e-9)) + 1;
  int best = 0;
  for (int i = 0; i < n; ++i) {
    // Round to the step so that curves for different bounds share cache keys.
    const double s = std::round((bracket.lo + i * curve_step) * 1e9) / 1e9;
    r.curve_sigma.push_back(s);
    r.curve_value.push_back(value(s));
    if (r.curve_value.back() < r.curve_value[best]) best = i;
  }
  const double a = std::max(bracket.lo, r.curve_sigma[best] - curve_step);
  const double b = std::min(bracket.hi, r.curve_sigma[best] + curve_step);
  r.sigma_opt = golden_section_min(value, a, b, tol);
  r.value_at_opt = value(r.sigma_opt);
  if (r.curve_value[best] < r.value_at_opt) {
    r.sigma_opt = r.curve_sigma[best];
    r.value_at_opt = r.curve_value[best];
  }
  r.at_boundary = best == 0 || best == n - 1;
  return r;
}

SandwichRow sandwich_interval(double if_jump, FunctionalSource& source, Bracket bracket) {
  check_if(if_jump, "if_jump");
  SandwichRow row;
  row.if_jump = if_jump;
  const SigmaOptResult u3 = minimize_rct(BoundId::urct3, if_jump, source, bracket);
  const SigmaOptResult u4 = minimize_rct(BoundId::urct4, if_jump, source, bracket);
  const SigmaOptResult l1 = minimize_rct(BoundId::lrct1, if_jump, source, bracket);
  const double m = std::min(u3.value_at_opt, u4.value_at_opt);
  row.rct_hi = m;
  row.rct_lo = l1.value_at_opt;
  auto excess = [&](double s) { return bound_rct(BoundId::lrct1, source(s), if_jump) - m; };
  auto tol = boost::math::tools::eps_tolerance<double>(40);
  auto root = [&](double a, double b) {
    if (excess(a) <= 0.0) return a;  // the set reaches the bracket edge
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(excess, a, b, tol, iters);
    return 0.5 * (r.first + r.second);
  };
  row.sigma_lo = root(bracket.lo, l1.sigma_opt);
  if (excess(bracket.hi) <= 0.0) {
    row.sigma_hi = bracket.hi;
  } else {
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(excess, l1.sigma_opt, bracket.hi, tol, iters);
    row.sigma_hi = 0.5 * (r.first + r.second);
  }
  return row;
}

double arif(double sigma, double l) {
  require(sigma >= 0.0, ErrorCode::domain, "arif needs sigma >= 0");
  require(l > 0.0, ErrorCode::domain, "arif needs l > 0; use lrif2 for the l -> 0 limit");
  return std::exp(log_norm_cdf(-0.5 * l) - log_norm_cdf(-0.5 * std::sqrt(2.0 * sigma * sigma + l * l)));
}

double arct(double sigma, double l) { return rct(arif(sigma, l), sigma); }

double psi(double sigma) {
  require(sigma > 0.0, ErrorCode::domain, "psi needs sigma > 0");
  return std::exp(0.25 * sigma * sigma) / (sigma * sigma);
}

}  // namespace pmtune
