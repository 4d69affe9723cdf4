// SPDX-License-Identifier: Apache-2.0
#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace pmtune {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", nullptr, "master seed (mandatory)"},
      {"outdir", "out", "output root; files go to <outdir>/<command>/"},
      {"workers", "1", "worker threads for independent cells"},
      // bounds_table, sandwich, arif_compare
      {"sigma_min", "0.1", "sigma grid start"},
      {"sigma_max", "3.0", "sigma grid end"},
      {"sigma_step", "0.01", "sigma grid step"},
      {"if_values", "1,4,20,80", "inefficiency parameters for bound curves"},
      {"if_jump_values", "1,10,25,100,1000", "jump-chain inefficiencies for the sandwich table"},
      {"bracket_lo", "0.1", "lower end of the sigma search bracket"},
      {"bracket_hi", "5.0", "upper end of the sigma search bracket"},
      {"l_values", "0.5,1,2.5,10", "diffusion-limit jump sizes"},
      // oracle_verify
      {"specs", "100", "random finite specs per family"},
      {"family", "both", "zero_diagonal, gram or both"},
      {"k_min", "3", "smallest theta state space"},
      {"k_max", "6", "largest theta state space"},
      {"m_min", "5", "smallest z grid"},
      {"m_max", "9", "largest z grid"},
      {"oracle_sigma_min", "0.3", "smallest noise sigma of random specs"},
      {"oracle_sigma_max", "2.5", "largest noise sigma of random specs"},
      // AR(1) plus noise
      {"phi", "0.8", "AR coefficient"},
      {"mu_x", "0.5", "state mean"},
      {"sigma_x2", "1.0", "marginal state variance"},
      {"sigma_eps2", "0.5", "observation noise variance (known)"},
      {"T", "300", "series length"},
      {"data_seed", "7", "seed of the simulated AR(1) data set"},
      {"n_grid", "11,16,22,31,43,60,83,116,161,224,312", "particle counts"},
      {"rho_grid", "0,0.4,0.6,0.9", "autoregressive proposal coefficients"},
      {"nu", "5", "t proposal degrees of freedom"},
      {"chain_length", "200000", "pseudo-marginal chain length at N = reference_n"},
      {"reference_n", "60", "chain length scales as chain_length * reference_n / N"},
      {"exact_length", "200000", "exact-chain length"},
      {"burn_in", "0.1", "burn-in as a fraction of the recorded length"},
      {"filter", "fully_adapted", "AR(1) particle filter: bootstrap or fully_adapted"},
      {"resample", "systematic", "multinomial or systematic"},
      {"replications", "500", "filter replications per sigma estimate"},
      {"if_method", "initial_sequence", "initial_sequence or batch_means"},
      {"scale_source", "pilot", "exact-chain proposal scale: pilot or laplace"},
      {"ar1_pilot_length", "50000", "pilot exact-chain length for the pilot scale source"},
      {"prior_variance", "100", "AR(1) prior variance on transformed parameters"},
      // calibrate
      {"model", "ar1", "ar1 or sv2f"},
      {"sigma_target", "0.92", "target noise standard deviation"},
      {"pilot_lo", "11", "smallest pilot N"},
      {"pilot_hi", "312", "largest pilot N"},
      // two-factor SV
      {"k1", "0.02", ""},
      {"mu1", "-0.5", ""},
      {"sigma1", "0.15", ""},
      {"k2", "1.0", ""},
      {"beta12", "0.1", ""},
      {"beta2", "0.5", ""},
      {"mu_y", "0.03", ""},
      {"phi1", "-0.3", ""},
      {"phi2", "-0.2", ""},
      {"substeps", "2", "Euler substeps per observation interval"},
      {"splice", "5.0", "sexp splice point"},
      {"sv_data_seed", "11", "seed of the simulated SV data set"},
      {"sv_sigma_target", "1.0", "noise target for the SV chain"},
      {"sv_pilot_lo", "20", "smallest SV pilot N"},
      {"sv_pilot_hi", "320", "largest SV pilot N"},
      {"sv_replications", "1000", "filter replications for SV calibration"},
      {"proxy_n", "2000", "particle count of the near-exact proxy chain"},
      {"sv_chain_length", "30000", "SV chain length at the calibrated N"},
      {"proxy_chain_length", "6000", "SV chain length at proxy_n"},
      {"pilot_length", "3000", "length of each SV proposal-tuning run"},
      {"sv_step", "1.0", "pilot random-walk step, times T^(-1/2)"},
      {"sv_prior_variance", "0.25", "SV prior variance, centred at the transformed truth"},
      {"sv_T", "300", "SV series length"},
  };
  return keys;
}

namespace {

const ConfigKey* find_key(const std::string& name) {
  for (const auto& k : config_keys())
    if (name == k.name) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  require(r.ec == std::errc() && r.ptr == end, ErrorCode::config, "key '" + key + "': not a number: '" + s + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  require(r.ec == std::errc() && r.ptr == end, ErrorCode::config, "key '" + key + "': not an integer: '" + s + "'");
  return v;
}

}  // namespace

Config Config::from_text(const std::string& text, const std::string& source) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    require(eq != std::string::npos, ErrorCode::config, where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    require(!key.empty(), ErrorCode::config, where + ": empty key");
    require(!c.values_.count(key), ErrorCode::config, where + ": duplicate key '" + key + "'");
    require(find_key(key) != nullptr, ErrorCode::config, where + ": unknown key '" + key + "'");
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str(), path);
}

void Config::set(const std::string& key, const std::string& value) {
  require(find_key(key) != nullptr, ErrorCode::config, "unknown key '" + key + "'");
  values_[key] = trim(value);
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::raw(const std::string& key) const {
  const ConfigKey* k = find_key(key);
  require(k != nullptr, ErrorCode::config, "unknown key '" + key + "'");
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  require(k->default_value != nullptr, ErrorCode::config, "missing mandatory key '" + key + "'");
  return k->default_value;
}

std::string Config::str(const std::string& key) const { return raw(key); }

double Config::num(const std::string& key) const { return parse_double(key, raw(key)); }

long long Config::integer(const std::string& key) const { return parse_int(key, raw(key)); }

std::uint64_t Config::u64(const std::string& key) const {
  const std::string s = raw(key);
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  require(r.ec == std::errc() && r.ptr == end, ErrorCode::config,
          "key '" + key + "': not an unsigned 64-bit integer: '" + s + "'");
  return v;
}

std::vector<double> Config::num_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : split(raw(key))) out.push_back(parse_double(key, s));
  return out;
}

std::vector<int> Config::int_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& s : split(raw(key))) out.push_back(static_cast<int>(parse_int(key, s)));
  return out;
}

std::uint64_t Config::seed() const { return u64("seed"); }

std::map<std::string, std::string> Config::effective() const {
  std::map<std::string, std::string> out;
  for (const auto& k : config_keys()) {
    if (auto it = values_.find(k.name); it != values_.end())
      out[k.name] = it->second;
    else if (k.default_value)
      out[k.name] = k.default_value;
  }
  return out;
}

}  // namespace pmtune
