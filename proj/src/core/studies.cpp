// SPDX-License-Identifier: Apache-2.0
#include "studies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "bounds.hpp"
#include "errors.hpp"
#include "exact_oracle.hpp"
#include "gaussian_noise.hpp"
#include "parallel.hpp"

namespace pmtune {
namespace {

using nlohmann::json;

std::vector<double> sigma_grid(const Config& c) {
  const double lo = c.num("sigma_min"), hi = c.num("sigma_max"), step = c.num("sigma_step");
  require(lo > 0.0 && hi >= lo && step > 0.0, ErrorCode::config, "invalid sigma grid");
  std::vector<double> g;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (int i = 0; i < n; ++i) g.push_back(std::round((lo + i * step) * 1e9) / 1e9);
  return g;
}

Bracket bracket_of(const Config& c) {
  Bracket b{c.num("bracket_lo"), c.num("bracket_hi")};
  require(b.lo > 0.0 && b.hi > b.lo, ErrorCode::config, "invalid sigma bracket");
  return b;
}

ResampleScheme scheme_of(const Config& c) {
  const std::string s = c.str("resample");
  if (s == "multinomial") return ResampleScheme::multinomial;
  if (s == "systematic") return ResampleScheme::systematic;
  fail(ErrorCode::config, "resample must be multinomial or systematic, got '" + s + "'");
}

IfMethod if_method_of(const Config& c) {
  const std::string s = c.str("if_method");
  if (s == "initial_sequence") return IfMethod::initial_sequence;
  if (s == "batch_means") return IfMethod::batch_means;
  fail(ErrorCode::config, "if_method must be initial_sequence or batch_means, got '" + s + "'");
}

unsigned workers_of(const Config& c) {
  const long long w = c.integer("workers");
  require(w >= 1 && w <= 1024, ErrorCode::config, "workers must be in [1, 1024]");
  return static_cast<unsigned>(w);
}

std::size_t length_of(const Config& c, const std::string& key) {
  const long long v = c.integer(key);
  require(v > 0, ErrorCode::config, key + " must be positive");
  return static_cast<std::size_t>(v);
}

void say(const ProgressFn& p, const std::string& msg) {
  if (p) p(msg);
}

std::string if_label(double v) { return std::isinf(v) ? "inf" : fmt(v); }

// ---------------------------------------------------------------- bounds

void cmd_bounds_table(const Config& c, const std::filesystem::path& dir, AssertionLog& log, json& summary) {
  const std::vector<double> grid = sigma_grid(c);
  const std::vector<double> ifs = c.num_list("if_values");
  for (double v : ifs) require(v >= 1.0, ErrorCode::config, "if_values must be >= 1");
  const Bracket br = bracket_of(c);
  FunctionalSource source;

  CsvWriter fn(dir / "functionals.csv", {"sigma", "mean_accept", "inv_accept", "phi1", "if_z"});
  for (double s : grid) {
    const NoiseFunctionals nf = source(s);
    fn.cell(s).cell(nf.mean_accept).cell(nf.inv_accept).cell(nf.phi1).cell(nf.if_z).end_row();
  }

  const std::vector<BoundId> param_bounds = {BoundId::urct1, BoundId::urct2, BoundId::urct3, BoundId::urct4,
                                             BoundId::lrct1};
  CsvWriter curves(dir / "curves.csv", {"sigma", "bound_id", "if_param", "value"});
  std::map<std::pair<int, double>, std::vector<double>> values;  // (bound, if) -> curve
  for (BoundId id : param_bounds)
    for (double v : ifs) {
      auto& out = values[{static_cast<int>(id), v}];
      for (double s : grid) {
        out.push_back(bound_rct(id, source(s), v));
        curves.cell(s).cell(std::string(bound_name(id))).cell(v).cell(out.back()).end_row();
      }
    }
  for (BoundId id : {BoundId::lrct2, BoundId::rct_perfect}) {
    auto& out = values[{static_cast<int>(id), 0.0}];
    for (double s : grid) {
      out.push_back(bound_rct(id, source(s), 1.0));
      curves.cell(s).cell(std::string(bound_name(id))).cell(std::string()).cell(out.back()).end_row();
    }
  }

  // Ordering that holds for every sigma: lrct2 <= lrct1 <= min(urct3, urct4)
  // at a common jump-chain inefficiency, and lrct2 <= rct_perfect.
  const auto& l2 = values[{static_cast<int>(BoundId::lrct2), 0.0}];
  const auto& perfect = values[{static_cast<int>(BoundId::rct_perfect), 0.0}];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::string cell = "sigma=" + fmt(grid[i]);
    log.at_most(cell, "lrct2 <= rct_perfect", l2[i], perfect[i], 1e-9 * perfect[i]);
    for (double v : ifs) {
      const double l1 = values[{static_cast<int>(BoundId::lrct1), v}][i];
      const double u = std::min(values[{static_cast<int>(BoundId::urct3), v}][i],
                                values[{static_cast<int>(BoundId::urct4), v}][i]);
      log.at_most(cell + ",if=" + fmt(v), "lrct2 <= lrct1", l2[i], l1, 1e-9 * l1);
      log.at_most(cell + ",if=" + fmt(v), "lrct1 <= min(urct3, urct4)", l1, u, 1e-9 * u);
    }
  }

  CsvWriter opt(dir / "optima.csv", {"bound_id", "if_param", "sigma_opt", "value", "at_boundary"});
  json optima = json::array();
  auto add_opt = [&](BoundId id, double v) {
    const SigmaOptResult r = minimize_rct(id, v, source, br);
    const std::string label = bound_parameter(id).empty() ? std::string() : if_label(v);
    opt.cell(std::string(bound_name(id))).cell(label).cell(r.sigma_opt).cell(r.value_at_opt)
        .cell(static_cast<int>(r.at_boundary)).end_row();
    optima.push_back({{"bound_id", bound_name(id)}, {"if_param", label}, {"sigma_opt", r.sigma_opt},
                      {"value", r.value_at_opt}});
    return r;
  };
  for (BoundId id : param_bounds) {
    for (double v : ifs) add_opt(id, v);
    add_opt(id, kInfiniteIf);
  }
  const SigmaOptResult l2opt = add_opt(BoundId::lrct2, 1.0);
  const SigmaOptResult popt = add_opt(BoundId::rct_perfect, 1.0);
  log.near("lrct2", "sigma_opt", l2opt.sigma_opt, 1.68, 0.01);
  log.near("lrct2", "min value", l2opt.value_at_opt, 1.51, 0.01);
  log.near("rct_perfect", "sigma_opt", popt.sigma_opt, 0.92, 0.01);
  log.near("rct_perfect", "min value", popt.value_at_opt, 5.36, 0.02);
  summary["optima"] = optima;

  std::vector<PlotSeries> series;
  const double ref_if = ifs.empty() ? 1.0 : ifs.front();
  for (BoundId id : param_bounds)
    series.push_back({std::string(bound_name(id)) + " (IF=" + fmt(ref_if) + ")", grid,
                      values[{static_cast<int>(id), ref_if}]});
  series.push_back({"lrct2", grid, l2});
  series.push_back({"rct_perfect", grid, perfect});
  write_svg_plot(dir / "bounds.svg", {"RCT bounds against sigma", "sigma", "RCT", true, 100.0}, series);
}

void cmd_sandwich(const Config& c, const std::filesystem::path& dir, AssertionLog& log, json& summary) {
  const std::vector<double> ifs = c.num_list("if_jump_values");
  for (double v : ifs) require(v >= 1.0, ErrorCode::config, "if_jump_values must be >= 1");
  const Bracket br = bracket_of(c);
  FunctionalSource source;
  std::vector<SandwichRow> rows(ifs.size());
  parallel_for(rows.size(), workers_of(c), [&](std::size_t i) { rows[i] = sandwich_interval(ifs[i], source, br); });
  CsvWriter out(dir / "sandwich.csv", {"if_jump", "rct_lo", "rct_hi", "sigma_lo", "sigma_hi"});
  json js = json::array();
  for (const SandwichRow& r : rows) {
    out.cell(r.if_jump).cell(r.rct_lo).cell(r.rct_hi).cell(r.sigma_lo).cell(r.sigma_hi).end_row();
    const std::string cell = "if_jump=" + fmt(r.if_jump);
    log.at_most(cell, "rct_lo <= rct_hi", r.rct_lo, r.rct_hi);
    log.at_most(cell, "sigma_lo <= sigma_hi", r.sigma_lo, r.sigma_hi);
    js.push_back({{"if_jump", r.if_jump}, {"rct_lo", r.rct_lo}, {"rct_hi", r.rct_hi}, {"sigma_lo", r.sigma_lo},
                  {"sigma_hi", r.sigma_hi}});
  }
  summary["rows"] = js;
}

void cmd_arif_compare(const Config& c, const std::filesystem::path& dir, AssertionLog& log, json& summary) {
  const std::vector<double> grid = sigma_grid(c);
  const std::vector<double> ls = c.num_list("l_values");
  for (double l : ls) require(l > 0.0, ErrorCode::config, "l_values must be positive");
  CsvWriter out(dir / "curves.csv", {"sigma", "curve", "l", "value"});
  std::vector<PlotSeries> series;
  for (double l : ls) {
    PlotSeries s{"arct l=" + fmt(l), grid, {}};
    for (double x : grid) {
      s.y.push_back(arct(x, l));
      out.cell(x).cell(std::string("arct")).cell(l).cell(s.y.back()).end_row();
    }
    series.push_back(std::move(s));
  }
  PlotSeries l2{"lrct2", grid, {}}, ps{"psi", grid, {}};
  for (double x : grid) {
    l2.y.push_back(rct(lrif2(x), x));
    ps.y.push_back(psi(x));
    out.cell(x).cell(std::string("lrct2")).cell(std::string()).cell(l2.y.back()).end_row();
    out.cell(x).cell(std::string("psi")).cell(std::string()).cell(ps.y.back()).end_row();
  }
  series.push_back(l2);
  series.push_back(ps);
  write_svg_plot(dir / "arct.svg", {"Diffusion-limit RCT against sigma", "sigma", "RCT", true, 20.0}, series);

  // Limits in the jump size: l -> 0 gives lrif2 (relative check, the slope in l
  // grows with sigma), large l gives psi on the RCT scale.
  for (double x : grid) {
    const std::string cell = "sigma=" + fmt(x);
    log.near(cell, "arif(l=1e-4) / lrif2 - 1", arif(x, 1e-4) / lrif2(x) - 1.0, 0.0, 1e-3);
    log.near(cell, "arct(l=50) - psi", arct(x, 50.0), psi(x), 1e-2);
  }
  const Bracket br = bracket_of(c);
  const double s_psi = golden_section_min(psi, br.lo, br.hi, 1e-6);
  const double s_l2 = golden_section_min([](double x) { return rct(lrif2(x), x); }, br.lo, br.hi, 1e-6);
  CsvWriter opt(dir / "optima.csv", {"curve", "l", "sigma_opt", "value"});
  opt.cell(std::string("psi")).cell(std::string()).cell(s_psi).cell(psi(s_psi)).end_row();
  opt.cell(std::string("lrct2")).cell(std::string()).cell(s_l2).cell(rct(lrif2(s_l2), s_l2)).end_row();
  for (double l : ls) {
    const double s = golden_section_min([l](double x) { return arct(x, l); }, br.lo, br.hi, 1e-6);
    opt.cell(std::string("arct")).cell(l).cell(s).cell(arct(s, l)).end_row();
  }
  log.near("psi", "sigma_opt", s_psi, 2.0, 0.01);
  log.near("psi", "min value", psi(s_psi), 0.68, 0.01);
  summary["psi_sigma_opt"] = s_psi;
  summary["psi_min"] = psi(s_psi);
  summary["lrct2_sigma_opt"] = s_l2;
}

// ---------------------------------------------------------------- oracle

void cmd_oracle_verify(const Config& c, const std::filesystem::path& dir, AssertionLog& log, json& summary) {
  const std::string fam = c.str("family");
  std::vector<std::pair<std::string, ProposalFamily>> families;
  if (fam == "zero_diagonal" || fam == "both") families.emplace_back("zero_diagonal", ProposalFamily::zero_diagonal);
  if (fam == "gram" || fam == "both") families.emplace_back("gram", ProposalFamily::gram);
  require(!families.empty(), ErrorCode::config, "family must be zero_diagonal, gram or both");

  BatteryOptions o;
  o.count = static_cast<int>(c.integer("specs"));
  require(o.count >= 0, ErrorCode::config, "specs must be >= 0");
  o.workers = workers_of(c);
  o.spec.k_min = static_cast<int>(c.integer("k_min"));
  o.spec.k_max = static_cast<int>(c.integer("k_max"));
  o.spec.m_min = static_cast<int>(c.integer("m_min"));
  o.spec.m_max = static_cast<int>(c.integer("m_max"));
  o.spec.sigma_min = c.num("oracle_sigma_min");
  o.spec.sigma_max = c.num("oracle_sigma_max");

  json failing = json::array();
  CsvWriter out(dir / "battery.csv", {"family", "specs", "passed", "worst_theorem", "worst_tensor", "worst_prop2",
                                      "worst_lemma3", "worst_peskun", "bound_failures", "lrif1_applicable",
                                      "urif2_applicable"});
  for (std::size_t f = 0; f < families.size(); ++f) {
    o.seed = derive_seed(c.seed(), f);
    o.spec.family = families[f].second;
    const BatteryResult r = run_battery(o);
    const std::string& name = families[f].first;
    out.cell(name).cell(r.count).cell(r.passed).cell(r.worst_theorem).cell(r.worst_tensor).cell(r.worst_prop2)
        .cell(r.worst_lemma3).cell(r.worst_peskun).cell(r.bound_failures).cell(r.lrif1_applicable)
        .cell(r.urif2_applicable).end_row();
    log.check(r.passed == r.count, name, "specs passing", r.passed, r.count);
    log.at_most(name, "theorem residual", r.worst_theorem, o.theorem_tol);
    log.at_most(name, "tensor residual", r.worst_tensor, o.tensor_tol);
    log.at_most(name, "prop2 residual", r.worst_prop2, o.prop2_tol);
    log.check(r.worst_peskun >= -1e-12, name, "IF(Q) <= IF(Q*)", r.worst_peskun, 0.0, 1e-12);
    log.check(r.bound_failures == 0, name, "bound lattice", r.bound_failures, 0.0);
    for (json j : r.failures) {
      j["family"] = name;
      failing.push_back(std::move(j));
    }
    summary[name] = {{"specs", r.count},
                     {"passed", r.passed},
                     {"worst_theorem", r.worst_theorem},
                     {"worst_tensor", r.worst_tensor},
                     {"worst_prop2", r.worst_prop2},
                     {"worst_lemma3", r.worst_lemma3},
                     {"worst_peskun", r.worst_peskun},
                     {"bound_failures", r.bound_failures},
                     {"lrif1_applicable", r.lrif1_applicable},
                     {"urif2_applicable", r.urif2_applicable}};
  }
  open_output(dir / "failing_specs.json") << failing.dump(2) << "\n";
}

// ---------------------------------------------------------------- AR(1)

// The N = 60 anchor only applies to the default AR(1) data set and filter.
bool ar1_defaults(const Config& c) {
  const Config plain = Config::from_text("");
  for (const char* k : {"phi", "mu_x", "sigma_x2", "sigma_eps2", "T", "data_seed", "filter", "resample"})
    if (c.str(k) != plain.str(k)) return false;
  return true;
}

void write_calibration(const std::filesystem::path& path, const std::vector<CalibrationRow>& rows) {
  std::ofstream out = open_output(path);
  write_calibration_csv(rows, out);
}

void write_z(const std::filesystem::path& path, const std::vector<double>& z) {
  CsvWriter w(path, {"i", "z"});
  for (std::size_t i = 0; i < z.size(); ++i) w.cell(i).cell(z[i]).end_row();
}

json fit_json(const NChoice& ch) {
  return {{"c", ch.c}, {"slope", ch.slope}, {"r_squared", ch.r_squared}, {"n_star", ch.n_star},
          {"poor_fit", ch.poor_fit}};
}

void cmd_calibrate(const Config& c, const std::filesystem::path& dir, AssertionLog& log, json& summary,
                   const ProgressFn& progress) {
  const std::string model = c.str("model");
  if (model == "ar1") {
    Ar1StudyOptions o = ar1_options(c);
    o.progress = progress;
    const std::vector<int> grid = o.n_grid;
    const Ar1Setup setup = ar1_setup(o);
    {
      std::ofstream d = open_output(dir / "data.csv");
      write_series_csv(setup.data.y, d);
    }
    say(progress, "estimating sigma over the N grid");
    const std::vector<CalibrationRow> rows = ar1_sigma_rows(o, setup, grid, derive_seed(o.seed, 200));
    write_calibration(dir / "calibration.csv", rows);
    std::vector<int> ns;
    std::vector<double> s, s2;
    for (const CalibrationRow& r : rows) {
      ns.push_back(r.particles);
      s.push_back(r.sigma_hat);
      s2.push_back(r.sigma_hat * r.sigma_hat);
    }
    const NChoice ch = fit_n_choice(ns, s2, c.num("sigma_target"));
    const double r2 = variance_vs_inverse_n_r2(ns, s);
    summary["fit"] = fit_json(ch);
    summary["variance_vs_inverse_n_r2"] = r2;
    summary["reference_psi"] = {setup.pilot_mean(0), setup.pilot_mean(1), setup.pilot_mean(2)};
    log.check(r2 > 0.95, "fit", "sigma^2 vs 1/N R^2", r2, 0.95);
    log.check(!ch.poor_fit, "fit", "log-log fit R^2 >= 0.9", ch.r_squared, 0.9);
    if (ar1_defaults(c))
      for (const CalibrationRow& r : rows)
        if (r.particles == 60) log.near("N=60", "sigma_hat anchor", r.sigma_hat, 0.92, 0.08);
    return;
  }
  require(model == "sv2f", ErrorCode::config, "model must be ar1 or sv2f, got '" + model + "'");
  SvStudyOptions o = sv_options(c);
  o.run_chains = false;
  o.progress = progress;
  const SvStudy st = run_sv_study(o);
  std::vector<CalibrationRow> rows = st.choice.pilot;
  if (st.choice.confirmation) rows.push_back(*st.choice.confirmation);
  write_calibration(dir / "calibration.csv", rows);
  write_z(dir / "z.csv", st.calibrated.z);
  summary["fit"] = fit_json(st.choice);
  summary["sigma_at_n_star"] = st.calibrated.sigma_hat;
  log.check(!st.choice.poor_fit, "fit", "log-log fit R^2 >= 0.9", st.choice.r_squared, 0.9);
}

void cmd_ar1_study(const Config& c, const std::filesystem::path& dir, AssertionLog& log, json& summary,
                   const ProgressFn& progress) {
  Ar1StudyOptions o = ar1_options(c);
  o.progress = progress;
  const Ar1Study st = run_ar1_study(o);
  {
    std::ofstream d = open_output(dir / "data.csv");
    write_series_csv(st.setup.data.y, d);
  }
  write_calibration(dir / "sigma.csv", st.sigma_rows);

  const char* names[kAr1Params] = {"phi", "mu_x", "sigma_x"};
  CsvWriter ex(dir / "exact.csv", {"rho", "param", "if_ex", "se", "acceptance", "iterations"});
  json exact = json::array();
  for (const Ar1ExactResult& e : st.exact) {
    json ifs = json::object();
    for (int j = 0; j < kAr1Params; ++j) {
      ex.cell(e.rho).cell(std::string(names[j])).cell(e.if_ex[j].value).cell(e.if_ex[j].se).cell(e.acceptance)
          .cell(e.iterations).end_row();
      ifs[names[j]] = {{"value", e.if_ex[j].value}, {"se", e.if_ex[j].se}};
    }
    exact.push_back({{"rho", e.rho}, {"if_ex", ifs}, {"acceptance", e.acceptance}});
  }

  CsvWriter cells(dir / "cells.csv",
                  {"rho", "N", "sigma", "if_phi", "if_mu_x", "if_sigma_x", "se_phi", "se_mu_x", "se_sigma_x",
                   "ct_phi", "ct_mu_x", "ct_sigma_x", "ct_mean", "rct_phi", "rct_mu_x", "rct_sigma_x", "rct_mean",
                   "acceptance", "acceptance_se", "acceptance_bound", "iterations", "infinite_estimates"});
  std::map<double, std::vector<const Ar1Cell*>> by_rho;
  for (const Ar1Cell& k : st.cells) {
    cells.cell(k.rho).cell(k.particles).cell(k.sigma);
    for (int j = 0; j < kAr1Params; ++j) cells.cell(k.if_q[j].value);
    for (int j = 0; j < kAr1Params; ++j) cells.cell(k.if_q[j].se);
    for (int j = 0; j < kAr1Params; ++j) cells.cell(k.ct[j]);
    cells.cell(k.ct_mean);
    for (int j = 0; j < kAr1Params; ++j) cells.cell(k.rct[j]);
    cells.cell(k.rct_mean).cell(k.acceptance).cell(k.acceptance_se).cell(k.acceptance_bound).cell(k.iterations)
        .cell(k.infinite_estimates).end_row();
    by_rho[k.rho].push_back(&k);
    log.check(k.acceptance >= k.acceptance_bound - 2.0 * k.acceptance_se,
              "rho=" + fmt(k.rho) + ",N=" + std::to_string(k.particles), "acceptance >= bound - 2 SE", k.acceptance,
              k.acceptance_bound, 2.0 * k.acceptance_se);
  }

  json argmin = json::object();
  std::vector<PlotSeries> ct_series, rct_series, acc_series;
  for (const auto& [rho, list] : by_rho) {
    argmin[fmt(rho)] = ar1_ct_argmin(st, rho);
    PlotSeries ct{"rho=" + fmt(rho), {}, {}}, r{"rho=" + fmt(rho), {}, {}};
    PlotSeries a{"acceptance rho=" + fmt(rho), {}, {}}, b{"bound rho=" + fmt(rho), {}, {}};
    for (const Ar1Cell* k : list) {
      ct.x.push_back(k->particles);
      ct.y.push_back(k->ct_mean);
      r.x.push_back(k->sigma);
      r.y.push_back(k->rct_mean);
      a.x.push_back(k->sigma);
      a.y.push_back(k->acceptance);
      b.x.push_back(k->sigma);
      b.y.push_back(k->acceptance_bound);
    }
    ct_series.push_back(ct);
    rct_series.push_back(r);
    acc_series.push_back(a);
    acc_series.push_back(b);
  }
  write_svg_plot(dir / "ct.svg", {"Computing time against N", "N", "CT (mean over parameters)", true, 0.0},
                 ct_series);
  write_svg_plot(dir / "rct.svg", {"Relative computing time against sigma", "sigma", "RCT", true, 0.0}, rct_series);
  write_svg_plot(dir / "acceptance.svg", {"Acceptance rate and lower bound", "sigma", "acceptance", false, 0.0},
                 acc_series);
  summary["exact"] = exact;
  summary["ct_argmin"] = argmin;
  summary["reference_psi"] = {st.setup.pilot_mean(0), st.setup.pilot_mean(1), st.setup.pilot_mean(2)};
}

// ---------------------------------------------------------------- SV

void cmd_sv_study(const Config& c, const std::filesystem::path& dir, AssertionLog& log, json& summary,
                  const ProgressFn& progress) {
  SvStudyOptions o = sv_options(c);
  o.progress = progress;
  const SvStudy st = run_sv_study(o);
  {
    std::ofstream d = open_output(dir / "data.csv");
    write_series_csv(st.data.y, d);
    std::ofstream l = open_output(dir / "latent.csv");
    write_latent_csv(st.data, o.truth.substeps, l);
  }
  std::vector<CalibrationRow> rows = st.choice.pilot;
  if (st.choice.confirmation) rows.push_back(*st.choice.confirmation);
  write_calibration(dir / "calibration.csv", rows);
  write_z(dir / "z.csv", st.calibrated.z);
  write_z(dir / "z_tilted.csv", st.tilted.z);

  const ZDiagnostics& m = st.calibrated.moments;
  log.check(std::abs(m.d_shift) <= 4.0, "N*=" + std::to_string(st.choice.n_star), "mean -sigma^2/2 (4 SE)",
            m.d_shift, 0.0, 4.0);
  log.check(std::abs(st.var_discrepancy) <= 4.0, "N*=" + std::to_string(st.choice.n_star),
            "variance vs c/N (4 SE)", st.var_discrepancy, 0.0, 4.0);
  summary["fit"] = fit_json(st.choice);
  summary["sigma_at_n_star"] = st.calibrated.sigma_hat;
  summary["z"] = {{"mean", m.mean}, {"var", m.var}, {"m3", m.m3}, {"m4", m.m4}, {"d_shift", m.d_shift},
                  {"var_discrepancy", st.var_discrepancy}, {"d_m3", m.d_m3}, {"d_m4", m.d_m4}};
  summary["tilted_acceptance"] = st.tilted.acceptance;
  if (!o.run_chains) return;

  CsvWriter out(dir / "chains.csv", {"param", "if_q", "se_q", "if_proxy", "se_proxy", "mean_q", "mean_proxy"});
  for (int j = 0; j < kSv2fParams; ++j) {
    const IfEstimate& q = st.q.if_theta[j];
    const IfEstimate& p = st.proxy.if_theta[j];
    out.cell(std::string(sv2f_param_name(j))).cell(q.value).cell(q.se).cell(p.value).cell(p.se)
        .cell(st.q.mean_theta(j)).cell(st.proxy.mean_theta(j)).end_row();
    const double se = std::hypot(q.se, p.se);
    log.check(q.value + 3.0 * se >= p.value, sv2f_param_name(j), "IF(N*) >= IF(proxy) - 3 SE", q.value, p.value,
              3.0 * se);
  }
  summary["q"] = {{"particles", st.q.particles}, {"acceptance", st.q.acceptance},
                  {"infinite_estimates", st.q.infinite_estimates}, {"iterations", st.q.iterations}};
  summary["proxy"] = {{"particles", st.proxy.particles}, {"acceptance", st.proxy.acceptance},
                      {"infinite_estimates", st.proxy.infinite_estimates}, {"iterations", st.proxy.iterations},
                      {"sigma_hat", st.proxy_sigma.sigma_hat}};
}

}  // namespace

Ar1StudyOptions ar1_options(const Config& c) {
  Ar1StudyOptions o;
  o.truth.phi = c.num("phi");
  o.truth.mu_x = c.num("mu_x");
  o.truth.sigma_x2 = c.num("sigma_x2");
  o.truth.sigma_eps2 = c.num("sigma_eps2");
  try {
    o.truth.validate();
  } catch (const Error& e) {
    fail(ErrorCode::config, e.what());
  }
  o.T = static_cast<int>(c.integer("T"));
  require(o.T >= 2, ErrorCode::config, "T must be >= 2");
  o.data_seed = c.u64("data_seed");
  o.seed = c.seed();
  o.n_grid = c.int_list("n_grid");
  for (int n : o.n_grid) require(n >= 1, ErrorCode::config, "n_grid entries must be >= 1");
  o.rho_grid = c.num_list("rho_grid");
  for (double r : o.rho_grid) require(r >= 0.0 && r < 1.0, ErrorCode::config, "rho_grid entries must be in [0, 1)");
  o.nu = c.num("nu");
  require(o.nu > 2.0, ErrorCode::config, "nu must exceed 2");
  o.chain_length = length_of(c, "chain_length");
  o.reference_n = static_cast<int>(c.integer("reference_n"));
  require(o.reference_n >= 1, ErrorCode::config, "reference_n must be >= 1");
  o.exact_length = length_of(c, "exact_length");
  o.burn_in = c.num("burn_in");
  require(o.burn_in >= 0.0 && o.burn_in < 10.0, ErrorCode::config, "burn_in must be in [0, 10)");
  const std::string f = c.str("filter");
  if (f == "bootstrap")
    o.filter = Ar1Filter::bootstrap;
  else if (f == "fully_adapted")
    o.filter = Ar1Filter::fully_adapted;
  else
    fail(ErrorCode::config, "filter must be bootstrap or fully_adapted, got '" + f + "'");
  o.scheme = scheme_of(c);
  o.replications = static_cast<int>(c.integer("replications"));
  require(o.replications >= 30, ErrorCode::config, "replications must be >= 30");
  o.if_method = if_method_of(c);
  o.prior_variance = c.num("prior_variance");
  require(o.prior_variance > 0.0, ErrorCode::config, "prior_variance must be positive");
  const std::string s = c.str("scale_source");
  if (s == "pilot")
    o.scale_source = Ar1ScaleSource::pilot;
  else if (s == "laplace")
    o.scale_source = Ar1ScaleSource::laplace;
  else
    fail(ErrorCode::config, "scale_source must be pilot or laplace, got '" + s + "'");
  o.pilot_length = length_of(c, "ar1_pilot_length");
  o.workers = workers_of(c);
  return o;
}

SvStudyOptions sv_options(const Config& c) {
  SvStudyOptions o;
  Sv2fModel& m = o.truth;
  m.k1 = c.num("k1");
  m.mu1 = c.num("mu1");
  m.sigma1 = c.num("sigma1");
  m.k2 = c.num("k2");
  m.beta12 = c.num("beta12");
  m.beta2 = c.num("beta2");
  m.mu_y = c.num("mu_y");
  m.phi1 = c.num("phi1");
  m.phi2 = c.num("phi2");
  m.substeps = static_cast<int>(c.integer("substeps"));
  m.splice = c.num("splice");
  try {
    m.validate();
  } catch (const Error& e) {
    fail(ErrorCode::config, e.what());
  }
  o.T = static_cast<int>(c.integer("sv_T"));
  require(o.T >= 2, ErrorCode::config, "sv_T must be >= 2");
  o.data_seed = c.u64("sv_data_seed");
  o.seed = c.seed();
  o.scheme = scheme_of(c);
  o.sigma_target = c.num("sv_sigma_target");
  require(o.sigma_target > 0.0, ErrorCode::config, "sv_sigma_target must be positive");
  o.pilot_lo = static_cast<int>(c.integer("sv_pilot_lo"));
  o.pilot_hi = static_cast<int>(c.integer("sv_pilot_hi"));
  require(o.pilot_lo >= 1 && o.pilot_hi > o.pilot_lo, ErrorCode::config, "invalid SV pilot range");
  o.replications = static_cast<int>(c.integer("sv_replications"));
  require(o.replications >= 100, ErrorCode::config, "sv_replications must be >= 100");
  o.proxy_n = static_cast<int>(c.integer("proxy_n"));
  require(o.proxy_n >= 1, ErrorCode::config, "proxy_n must be >= 1");
  o.chain_length = length_of(c, "sv_chain_length");
  o.proxy_chain_length = length_of(c, "proxy_chain_length");
  o.pilot_length = length_of(c, "pilot_length");
  o.step = c.num("sv_step");
  require(o.step > 0.0, ErrorCode::config, "sv_step must be positive");
  o.burn_in = c.num("burn_in");
  require(o.burn_in >= 0.0 && o.burn_in < 10.0, ErrorCode::config, "burn_in must be in [0, 10)");
  o.prior_variance = c.num("sv_prior_variance");
  require(o.prior_variance > 0.0, ErrorCode::config, "sv_prior_variance must be positive");
  o.if_method = if_method_of(c);
  o.workers = workers_of(c);
  return o;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"bounds_table", "sandwich",  "arif_compare", "oracle_verify",
                                                 "calibrate",    "ar1_study", "sv_study"};
  return names;
}

CommandResult run_command(const std::string& command, const Config& config, const ProgressFn& progress) {
  if (std::find(command_names().begin(), command_names().end(), command) == command_names().end())
    fail(ErrorCode::config, "unknown command '" + command + "'");
  config.seed();  // mandatory for every command

  CommandResult r;
  r.command = command;
  r.dir = command_dir(config.str("outdir"), command);
  {
    std::ofstream rc = open_output(r.dir / "run_config.txt");
    for (const auto& [k, v] : config.effective()) rc << k << " = " << v << "\n";
  }
  AssertionLog log(command);
  json summary = json::object();
  if (command == "bounds_table")
    cmd_bounds_table(config, r.dir, log, summary);
  else if (command == "sandwich")
    cmd_sandwich(config, r.dir, log, summary);
  else if (command == "arif_compare")
    cmd_arif_compare(config, r.dir, log, summary);
  else if (command == "oracle_verify")
    cmd_oracle_verify(config, r.dir, log, summary);
  else if (command == "calibrate")
    cmd_calibrate(config, r.dir, log, summary, progress);
  else if (command == "ar1_study")
    cmd_ar1_study(config, r.dir, log, summary, progress);
  else
    cmd_sv_study(config, r.dir, log, summary, progress);

  r.failures = log.failures();
  r.checks = log.checks();
  summary["checks"] = r.checks;
  summary["failures"] = static_cast<int>(r.failures.size());
  r.summary = summary;
  open_output(r.dir / "summary.json") << summary.dump(2) << "\n";
  open_output(r.dir / "failures.json") << log.to_json().dump(2) << "\n";
  return r;
}

}  // namespace pmtune
