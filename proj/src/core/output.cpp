// SPDX-License-Identifier: Apache-2.0
#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "errors.hpp"

namespace pmtune {

std::filesystem::path command_dir(const std::string& outdir, const std::string& command) {
  const std::filesystem::path dir = std::filesystem::path(outdir) / command;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open " + path.string() + " for writing");
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(open_output(path)), columns_(header.size()), path_(path) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(double v) { return cell(fmt(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& v) {
  require(filled_ < columns_, ErrorCode::assertion, "too many cells in a row of " + path_.string());
  out_ << (filled_ ? "," : "") << v;
  ++filled_;
  return *this;
}

void CsvWriter::end_row() {
  require(filled_ == columns_, ErrorCode::assertion, "short row in " + path_.string());
  out_ << '\n';
  filled_ = 0;
  require(static_cast<bool>(out_), ErrorCode::io, "write failed for " + path_.string());
}

namespace {

std::string escape(const std::string& s) {
  std::string r;
  for (char c : s) {
    switch (c) {
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '&': r += "&amp;"; break;
      default: r += c;
    }
  }
  return r;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
  auto usable = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return false;
    if (spec.log_y && y <= 0.0) return false;
    return spec.y_max <= 0.0 || y <= spec.y_max;
  };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  std::ofstream out = open_output(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
      << "</text>\n";
  if (!(x1 > x0)) {
    out << "</svg>\n";
    return;
  }
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return T + ph - (ty(y) - y0) / (y1 - y0) * ph; };
  out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    const double ylab = spec.log_y ? std::pow(10.0, yv) : yv;
    out << "<text x=\"" << px(xv) << "\" y=\"" << T + ph + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << fmt(std::round(xv * 1000) / 1000) << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << T + ph - (yv - y0) / (y1 - y0) * ph + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(std::round(ylab * 1000) / 1000) << "</text>\n";
  }
  out << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << escape(spec.x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << T + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << T + ph / 2 << ")\">" << escape(spec.y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (usable(s.x[i], s.y[i])) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    out << "\"/>\n";
    const double ly = T + 14 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << L + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << L + pw + 30 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << L + pw + 34 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << escape(s.label)
        << "</text>\n";
  }
  out << "</svg>\n";
}

nlohmann::json failure_json(const Failure& f) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(fmt(v)); };
  return {{"command", f.command},        {"cell", f.cell},        {"assertion", f.assertion},
          {"observed", num(f.observed)}, {"expected", num(f.expected)}, {"tolerance", num(f.tolerance)}};
}

bool AssertionLog::check(bool ok, const std::string& cell, const std::string& assertion, double observed,
                         double expected, double tolerance) {
  ++checks_;
  if (!ok) failures_.push_back({command_, cell, assertion, observed, expected, tolerance});
  return ok;
}

bool AssertionLog::near(const std::string& cell, const std::string& assertion, double observed, double expected,
                        double tolerance) {
  return check(std::abs(observed - expected) <= tolerance, cell, assertion, observed, expected, tolerance);
}

bool AssertionLog::at_most(const std::string& cell, const std::string& assertion, double observed, double bound,
                           double tolerance) {
  return check(observed <= bound + tolerance, cell, assertion, observed, bound, tolerance);
}

nlohmann::json AssertionLog::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : failures_) arr.push_back(failure_json(f));
  return arr;
}

}  // namespace pmtune
