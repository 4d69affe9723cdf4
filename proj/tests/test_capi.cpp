// SPDX-License-Identifier: Apache-2.0
//
// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "pmtune/pmtune.h"

TEST_CASE("config handles") {
  pmtune_config* c = nullptr;
  REQUIRE(pmtune_config_parse("seed = 9\nphi = 0.7\n", &c) == PMTUNE_OK);
  char buf[32];
  size_t needed = 0;
  CHECK(pmtune_config_get(c, "phi", buf, sizeof buf, &needed) == PMTUNE_OK);
  CHECK(std::string(buf) == "0.7");
  CHECK(needed == 4);
  CHECK(pmtune_config_get(c, "phi", buf, 2, &needed) == PMTUNE_E_INVALID_ARGUMENT);
  CHECK(pmtune_config_set(c, "no_such_key", "1") == PMTUNE_E_CONFIG);
  CHECK(std::strstr(pmtune_last_error(), "no_such_key") != nullptr);
  CHECK(pmtune_config_set(c, "T", "200") == PMTUNE_OK);
  CHECK(pmtune_config_get(c, "T", buf, sizeof buf, nullptr) == PMTUNE_OK);
  CHECK(std::string(buf) == "200");
  pmtune_config_free(c);

  CHECK(pmtune_config_parse("bogus = 1\n", &c) == PMTUNE_E_CONFIG);
  CHECK(c == nullptr);
  CHECK(pmtune_config_load("/nonexistent/x.conf", &c) == PMTUNE_E_IO);
  CHECK(pmtune_config_new(nullptr) == PMTUNE_E_INVALID_ARGUMENT);
}

TEST_CASE("key and command registries") {
  bool seed_mandatory = false;
  for (size_t i = 0; i < pmtune_config_key_count(); ++i)
    if (std::string(pmtune_config_key_name(i)) == "seed") seed_mandatory = pmtune_config_key_default(i) == nullptr;
  CHECK(seed_mandatory);
  CHECK(pmtune_config_key_name(pmtune_config_key_count()) == nullptr);
  CHECK(pmtune_command_count() == 7);
  CHECK(std::string(pmtune_status_name(PMTUNE_E_PERIODIC)) == "periodic");
}

TEST_CASE("analytic helpers") {
  double v = 0.0, s = 0.0;
  CHECK(pmtune_mean_accept_z(0.92, &v) == PMTUNE_OK);
  CHECK(v == doctest::Approx(0.51).epsilon(0.01));
  pmtune_functionals f;
  CHECK(pmtune_noise_functionals(1.0, &f) == PMTUNE_OK);
  CHECK(f.inv_accept >= 1.0 / f.mean_accept);
  CHECK(pmtune_bound_rct("lrct2", 1.68, 1.0, &v) == PMTUNE_OK);
  CHECK(v == doctest::Approx(1.51).epsilon(0.01));
  CHECK(pmtune_bound_rct("urct7", 1.0, 1.0, &v) == PMTUNE_E_DOMAIN);
  CHECK(pmtune_bound_rct("urct2", 1.0, INFINITY, &v) == PMTUNE_OK);
  CHECK(pmtune_minimize_rct("rct_perfect", 1.0, 0.1, 5.0, &s, &v) == PMTUNE_OK);
  CHECK(s == doctest::Approx(0.92).epsilon(0.02));
  pmtune_sandwich_row row;
  CHECK(pmtune_sandwich(25.0, 0.1, 5.0, &row) == PMTUNE_OK);
  CHECK(row.rct_lo < row.rct_hi);
  CHECK(pmtune_arif(1.0, -1.0, &v) == PMTUNE_E_DOMAIN);
  CHECK(pmtune_psi(2.0, &v) == PMTUNE_OK);
  CHECK(v == doctest::Approx(std::exp(1.0) / 4.0));
}

namespace {
void count_messages(const char*, void* user) { ++*static_cast<int*>(user); }
}  // namespace

TEST_CASE("running a command") {
  pmtune_config* c = nullptr;
  REQUIRE(pmtune_config_parse("seed = 2\noutdir = capi_out\nif_jump_values = 10\n", &c) == PMTUNE_OK);
  pmtune_result* r = nullptr;
  int messages = 0;
  REQUIRE(pmtune_run("sandwich", c, count_messages, &messages, &r) == PMTUNE_OK);
  CHECK(pmtune_result_failure_count(r) == 0);
  CHECK(pmtune_result_check_count(r) > 0);
  CHECK(std::string(pmtune_result_failures_json(r)) == "[]");
  CHECK(std::string(pmtune_result_summary_json(r)).find("rows") != std::string::npos);
  CHECK(std::string(pmtune_result_output_dir(r)).find("sandwich") != std::string::npos);
  pmtune_result_free(r);

  CHECK(pmtune_run("nope", c, nullptr, nullptr, &r) == PMTUNE_E_CONFIG);
  CHECK(r == nullptr);
  pmtune_config_free(c);

  REQUIRE(pmtune_config_parse("outdir = capi_out\n", &c) == PMTUNE_OK);
  CHECK(pmtune_run("sandwich", c, nullptr, nullptr, &r) == PMTUNE_E_CONFIG);  // seed is mandatory
  pmtune_config_free(c);
}
