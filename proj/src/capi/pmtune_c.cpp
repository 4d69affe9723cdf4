// SPDX-License-Identifier: Apache-2.0
#include "pmtune/pmtune.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "bounds.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "gaussian_noise.hpp"
#include "studies.hpp"

struct pmtune_config {
  pmtune::Config config;
};

struct pmtune_result {
  pmtune::CommandResult result;
  std::string failures_json;
  std::string summary_json;
  std::string dir;
};

namespace {

thread_local std::string g_last_error;

pmtune_status set_error(pmtune_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class Fn>
pmtune_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return PMTUNE_OK;
  } catch (const pmtune::Error& e) {
    return set_error(static_cast<pmtune_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(PMTUNE_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(PMTUNE_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(PMTUNE_E_INTERNAL, "unknown exception");
  }
}

#define PMTUNE_REQUIRE_ARG(cond, what) \
  if (!(cond)) return set_error(PMTUNE_E_INVALID_ARGUMENT, what)

pmtune::BoundId parse_bound_or_throw(const char* name) {
  const auto id = pmtune::parse_bound(name);
  if (!id) pmtune::fail(pmtune::ErrorCode::domain, std::string("unknown bound '") + name + "'");
  return *id;
}

}  // namespace

extern "C" {

const char* pmtune_version(void) { return "0.1.0"; }

const char* pmtune_status_name(pmtune_status s) {
  switch (s) {
    case PMTUNE_OK: return "ok";
    case PMTUNE_E_DOMAIN: return "domain";
    case PMTUNE_E_NUMERICAL: return "numerical";
    case PMTUNE_E_IO: return "io";
    case PMTUNE_E_CONFIG: return "config";
    case PMTUNE_E_REDUCIBLE: return "reducible";
    case PMTUNE_E_PERIODIC: return "periodic";
    case PMTUNE_E_UNSUPPORTED: return "unsupported";
    case PMTUNE_E_ASSERTION: return "assertion";
    case PMTUNE_E_INVALID_ARGUMENT: return "invalid_argument";
    case PMTUNE_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* pmtune_last_error(void) { return g_last_error.c_str(); }

pmtune_status pmtune_config_new(pmtune_config** out) {
  PMTUNE_REQUIRE_ARG(out, "out is null");
  *out = nullptr;
  return guarded([&] { *out = new pmtune_config{pmtune::Config::from_text("")}; });
}

pmtune_status pmtune_config_load(const char* path, pmtune_config** out) {
  PMTUNE_REQUIRE_ARG(path && out, "path or out is null");
  *out = nullptr;
  return guarded([&] { *out = new pmtune_config{pmtune::Config::from_file(path)}; });
}

pmtune_status pmtune_config_parse(const char* text, pmtune_config** out) {
  PMTUNE_REQUIRE_ARG(text && out, "text or out is null");
  *out = nullptr;
  return guarded([&] { *out = new pmtune_config{pmtune::Config::from_text(text)}; });
}

void pmtune_config_free(pmtune_config* config) { delete config; }

pmtune_status pmtune_config_set(pmtune_config* config, const char* key, const char* value) {
  PMTUNE_REQUIRE_ARG(config && key && value, "null argument");
  return guarded([&] { config->config.set(key, value); });
}

pmtune_status pmtune_config_get(const pmtune_config* config, const char* key, char* buffer, size_t size,
                                size_t* needed) {
  PMTUNE_REQUIRE_ARG(config && key, "null argument");
  std::string v;
  const pmtune_status s = guarded([&] { v = config->config.str(key); });
  if (s != PMTUNE_OK) return s;
  if (needed) *needed = v.size() + 1;
  if (!buffer) return size == 0 ? PMTUNE_OK : set_error(PMTUNE_E_INVALID_ARGUMENT, "buffer is null");
  if (size < v.size() + 1) return set_error(PMTUNE_E_INVALID_ARGUMENT, "buffer too small");
  std::memcpy(buffer, v.c_str(), v.size() + 1);
  return PMTUNE_OK;
}

size_t pmtune_config_key_count(void) { return pmtune::config_keys().size(); }

const char* pmtune_config_key_name(size_t i) {
  return i < pmtune::config_keys().size() ? pmtune::config_keys()[i].name : nullptr;
}

const char* pmtune_config_key_default(size_t i) {
  return i < pmtune::config_keys().size() ? pmtune::config_keys()[i].default_value : nullptr;
}

const char* pmtune_config_key_help(size_t i) {
  return i < pmtune::config_keys().size() ? pmtune::config_keys()[i].help : nullptr;
}

size_t pmtune_command_count(void) { return pmtune::command_names().size(); }

const char* pmtune_command_name(size_t i) {
  return i < pmtune::command_names().size() ? pmtune::command_names()[i].c_str() : nullptr;
}

pmtune_status pmtune_run(const char* command, const pmtune_config* config, pmtune_progress_fn progress,
                         void* user_data, pmtune_result** out) {
  PMTUNE_REQUIRE_ARG(command && config && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    pmtune::ProgressFn fn;
    if (progress) fn = [progress, user_data](const std::string& m) { progress(m.c_str(), user_data); };
    auto* r = new pmtune_result;
    try {
      r->result = pmtune::run_command(command, config->config, fn);
    } catch (...) {
      delete r;
      throw;
    }
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : r->result.failures) failures.push_back(pmtune::failure_json(f));
    r->failures_json = failures.dump();
    r->summary_json = r->result.summary.dump();
    r->dir = r->result.dir.string();
    *out = r;
  });
}

void pmtune_result_free(pmtune_result* result) { delete result; }

int pmtune_result_failure_count(const pmtune_result* r) {
  return r ? static_cast<int>(r->result.failures.size()) : -1;
}

int pmtune_result_check_count(const pmtune_result* r) { return r ? r->result.checks : -1; }

const char* pmtune_result_failures_json(const pmtune_result* r) { return r ? r->failures_json.c_str() : nullptr; }

const char* pmtune_result_summary_json(const pmtune_result* r) { return r ? r->summary_json.c_str() : nullptr; }

const char* pmtune_result_output_dir(const pmtune_result* r) { return r ? r->dir.c_str() : nullptr; }

pmtune_status pmtune_mean_accept_z(double sigma, double* out) {
  PMTUNE_REQUIRE_ARG(out, "out is null");
  return guarded([&] { *out = pmtune::mean_accept_z(sigma); });
}

pmtune_status pmtune_noise_functionals(double sigma, pmtune_functionals* out) {
  PMTUNE_REQUIRE_ARG(out, "out is null");
  return guarded([&] {
    const pmtune::NoiseFunctionals nf = pmtune::gaussian_functionals(sigma);
    *out = {nf.sigma, nf.mean_accept, nf.inv_accept, nf.phi1, nf.if_z};
  });
}

pmtune_status pmtune_bound_rct(const char* bound, double sigma, double if_param, double* out) {
  PMTUNE_REQUIRE_ARG(bound && out, "null argument");
  return guarded([&] {
    const pmtune::BoundId id = parse_bound_or_throw(bound);
    *out = pmtune::bound_rct(id, pmtune::gaussian_functionals(sigma), if_param);
  });
}

pmtune_status pmtune_minimize_rct(const char* bound, double if_param, double sigma_lo, double sigma_hi,
                                  double* sigma_opt, double* value) {
  PMTUNE_REQUIRE_ARG(bound && sigma_opt && value, "null argument");
  return guarded([&] {
    pmtune::FunctionalSource source;
    const auto r = pmtune::minimize_rct(parse_bound_or_throw(bound), if_param, source, {sigma_lo, sigma_hi});
    *sigma_opt = r.sigma_opt;
    *value = r.value_at_opt;
  });
}

pmtune_status pmtune_sandwich(double if_jump, double sigma_lo, double sigma_hi, pmtune_sandwich_row* out) {
  PMTUNE_REQUIRE_ARG(out, "out is null");
  return guarded([&] {
    pmtune::FunctionalSource source;
    const auto r = pmtune::sandwich_interval(if_jump, source, {sigma_lo, sigma_hi});
    *out = {r.if_jump, r.rct_lo, r.rct_hi, r.sigma_lo, r.sigma_hi};
  });
}

pmtune_status pmtune_arif(double sigma, double l, double* out) {
  PMTUNE_REQUIRE_ARG(out, "out is null");
  return guarded([&] { *out = pmtune::arif(sigma, l); });
}

pmtune_status pmtune_psi(double sigma, double* out) {
  PMTUNE_REQUIRE_ARG(out, "out is null");
  return guarded([&] { *out = pmtune::psi(sigma); });
}

}  // extern "C"
