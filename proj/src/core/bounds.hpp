// SPDX-License-Identifier: Apache-2.0
//
// Relative inefficiency (RIF) bounds for the pseudo-marginal chain Q and the
// bounding chain Q*, relative computing times RCT = RIF / sigma^2, their
// minimizers over sigma, and diffusion-limit comparison quantities.
#pragma once

#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaussian_noise.hpp"

namespace pmtune {

// Pass as an inefficiency argument to evaluate the limiting form.
inline constexpr double kInfiniteIf = std::numeric_limits<double>::infinity();

struct ExactChainProfile {
  double if_ex = 1.0;    // IF(h, Q_EX)
  double if_jump = 1.0;  // IF(h / rho_EX, jump kernel of Q_EX)

  // Rejects if_ex or if_jump below one, or if_jump > if_ex.
  static ExactChainProfile make(double if_ex, double if_jump);
};

double urif1(const NoiseFunctionals& nf, double if_ex);
double urif2(const NoiseFunctionals& nf, double if_ex);
double urif3(const NoiseFunctionals& nf, double if_jump);
double urif4(const NoiseFunctionals& nf, double if_jump);
double lrif1(const NoiseFunctionals& nf, double if_jump);
double lrif2(const NoiseFunctionals& nf);
double lrif2(double sigma);

double rct(double rif, double sigma);
// RCT of the pseudo-marginal chain with the perfect proposal q = pi.
double rct_perfect(const NoiseFunctionals& nf);
double rct_perfect(double sigma);

struct BoundSet {
  double sigma = 0.0;
  double urif1 = 1.0, urif2 = 1.0, urif3 = 1.0, urif4 = 1.0, lrif1 = 1.0, lrif2 = 1.0;
  double urct1 = 0.0, urct2 = 0.0, urct3 = 0.0, urct4 = 0.0, lrct1 = 0.0, lrct2 = 0.0;
};

BoundSet evaluate_bounds(const NoiseFunctionals& nf, const ExactChainProfile& profile);

enum class BoundId { urct1, urct2, urct3, urct4, lrct1, lrct2, rct_perfect };

std::string_view bound_name(BoundId id);
std::optional<BoundId> parse_bound(std::string_view name);
// Which inefficiency the bound takes: "if_ex", "if_jump" or "" for none.
std::string_view bound_parameter(BoundId id);

// RCT value of bound `id` at the functionals' sigma.
double bound_rct(BoundId id, const NoiseFunctionals& nf, double if_param);

// Memoized sigma -> NoiseFunctionals. Thread-safe.
class FunctionalSource {
 public:
  using Fn = std::function<NoiseFunctionals(double)>;
  FunctionalSource();  // Gaussian noise
  explicit FunctionalSource(Fn fn);
  NoiseFunctionals operator()(double sigma);

 private:
  Fn fn_;
  std::map<double, NoiseFunctionals> cache_;
  std::mutex mutex_;
};

struct Bracket {
  double lo = 0.1;
  double hi = 5.0;
};

struct SigmaOptResult {
  BoundId bound = BoundId::rct_perfect;
  double if_param = 1.0;
  double sigma_opt = 0.0;
  double value_at_opt = 0.0;
  bool at_boundary = false;
  std::vector<double> curve_sigma;
  std::vector<double> curve_value;
};

// Scans a uniform curve (step `curve_step`) over the bracket, then refines the
// best cell by golden-section search to tolerance `tol`.
SigmaOptResult minimize_rct(BoundId id, double if_param, FunctionalSource& source, Bracket bracket = {},
                            double tol = 1e-4, double curve_step = 0.01);

// Golden-section minimization of a scalar function on [a, b].
double golden_section_min(const std::function<double(double)>& f, double a, double b, double tol);

struct SandwichRow {
  double if_jump = 1.0;
  double rct_lo = 0.0, rct_hi = 0.0;
  double sigma_lo = 0.0, sigma_hi = 0.0;
};

SandwichRow sandwich_interval(double if_jump, FunctionalSource& source, Bracket bracket = {});

// Diffusion-limit relative inefficiency and computing time for jump size l.
double arif(double sigma, double l);
double arct(double sigma, double l);
// Limit of arct as l grows: exp(sigma^2/4) / sigma^2.
double psi(double sigma);

}  // namespace pmtune
