// SPDX-License-Identifier: Apache-2.0
//
// pmtune <command> --config <path> [--key value ...]
//
// Exit codes: 0 all assertions pass, 1 assertion failures (JSON on stdout),
// 2 usage or config error, 3 IO error, 4 any other error.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmtune/pmtune.h"

namespace {

int exit_code(pmtune_status s) {
  switch (s) {
    case PMTUNE_OK: return 0;
    case PMTUNE_E_CONFIG:
    case PMTUNE_E_INVALID_ARGUMENT: return 2;
    case PMTUNE_E_IO: return 3;
    default: return 4;
  }
}

int report(pmtune_status s, const char* what) {
  std::cerr << "pmtune: " << what << ": " << pmtune_status_name(s) << " error: " << pmtune_last_error() << "\n";
  return exit_code(s);
}

void progress(const char* message, void*) { std::cerr << "[pmtune] " << message << std::endl; }

std::string command_list() {
  std::string s;
  for (size_t i = 0; i < pmtune_command_count(); ++i) s += std::string(i ? ", " : "") + pmtune_command_name(i);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tuning the number of particles in pseudo-marginal Metropolis-Hastings"};
  app.allow_extras();
  std::string command, config_path;
  bool list_keys = false, quiet = false;
  app.add_option("command", command, "one of: " + command_list());
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_flag("--list-keys", list_keys, "print every configuration key with its default and exit");
  app.add_flag("--quiet", quiet, "suppress progress messages");
  app.footer("Any configuration key can be overridden with --key value or --key=value.");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (list_keys) {
    for (size_t i = 0; i < pmtune_config_key_count(); ++i) {
      const char* d = pmtune_config_key_default(i);
      std::printf("%-20s %-40s %s\n", pmtune_config_key_name(i), d ? d : "(mandatory)", pmtune_config_key_help(i));
    }
    return 0;
  }
  if (command.empty()) {
    std::cerr << "pmtune: missing command (" << command_list() << ")\n" << app.help();
    return 2;
  }

  pmtune_config* config = nullptr;
  pmtune_status s = config_path.empty() ? pmtune_config_new(&config) : pmtune_config_load(config_path.c_str(), &config);
  if (s != PMTUNE_OK) return report(s, config_path.empty() ? "config" : config_path.c_str());

  const std::vector<std::string> extras = app.remaining();
  for (size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0 || a.size() <= 2) {
      std::cerr << "pmtune: unexpected argument '" << a << "'\n";
      pmtune_config_free(config);
      return 2;
    }
    std::string key = a.substr(2), value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else if (i + 1 < extras.size()) {
      value = extras[++i];
    } else {
      std::cerr << "pmtune: option --" << key << " needs a value\n";
      pmtune_config_free(config);
      return 2;
    }
    s = pmtune_config_set(config, key.c_str(), value.c_str());
    if (s != PMTUNE_OK) {
      pmtune_config_free(config);
      return report(s, ("--" + key).c_str());
    }
  }

  pmtune_result* result = nullptr;
  s = pmtune_run(command.c_str(), config, quiet ? nullptr : progress, nullptr, &result);
  pmtune_config_free(config);
  if (s != PMTUNE_OK) return report(s, command.c_str());

  const int failures = pmtune_result_failure_count(result);
  std::cerr << "pmtune: " << command << ": " << pmtune_result_check_count(result) << " checks, " << failures
            << " failed; outputs in " << pmtune_result_output_dir(result) << "\n";
  if (failures > 0) std::cout << pmtune_result_failures_json(result) << "\n";
  pmtune_result_free(result);
  return failures > 0 ? 1 : 0;
}
