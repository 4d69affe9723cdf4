// SPDX-License-Identifier: Apache-2.0
//
// Output plumbing for the study commands: directories, CSV writing, SVG line
// plots and the failure report.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace pmtune {

// Creates (if needed) and returns <outdir>/<command>.
std::filesystem::path command_dir(const std::string& outdir, const std::string& command);

// Opens for writing or throws ErrorCode::io with the path in the message.
std::ofstream open_output(const std::filesystem::path& path);

// Shortest round-trip decimal form.
std::string fmt(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(const std::string& v);
  void end_row();

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
  std::filesystem::path path_;
};

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title, x_label, y_label;
  bool log_y = false;
  double y_max = 0.0;  // clip when positive
};

// Best effort: non-finite points are skipped.
void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<PlotSeries>& series);

struct Failure {
  std::string command, cell, assertion;
  double observed = 0.0, expected = 0.0, tolerance = 0.0;
};

nlohmann::json failure_json(const Failure& f);

// Collects internal assertion failures of one command run.
class AssertionLog {
 public:
  explicit AssertionLog(std::string command) : command_(std::move(command)) {}
  // |observed - expected| <= tolerance
  bool near(const std::string& cell, const std::string& assertion, double observed, double expected, double tolerance);
  // observed <= bound + tolerance
  bool at_most(const std::string& cell, const std::string& assertion, double observed, double bound,
               double tolerance = 0.0);
  bool check(bool ok, const std::string& cell, const std::string& assertion, double observed, double expected,
             double tolerance = 0.0);
  const std::vector<Failure>& failures() const { return failures_; }
  int checks() const { return checks_; }
  nlohmann::json to_json() const;

 private:
  std::string command_;
  std::vector<Failure> failures_;
  int checks_ = 0;
};

}  // namespace pmtune
