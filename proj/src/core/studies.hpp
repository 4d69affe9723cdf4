// SPDX-License-Identifier: Apache-2.0
//
// Command orchestration: each command reads a Config, writes its outputs under
// <outdir>/<command>/, and reports internal assertion failures.
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "output.hpp"
#include "study_ar1.hpp"
#include "study_sv.hpp"

namespace pmtune {

using ProgressFn = std::function<void(const std::string&)>;

struct CommandResult {
  std::string command;
  std::filesystem::path dir;
  std::vector<Failure> failures;
  int checks = 0;
  nlohmann::json summary;

  bool ok() const { return failures.empty(); }
};

const std::vector<std::string>& command_names();

// Throws Error for invalid configs and IO problems; assertion failures are
// returned in the result (and written to failures.json).
CommandResult run_command(const std::string& command, const Config& config, const ProgressFn& progress = {});

Ar1StudyOptions ar1_options(const Config& config);
SvStudyOptions sv_options(const Config& config);

}  // namespace pmtune
