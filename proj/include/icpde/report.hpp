#pragma once

// Report files: per-row CSV (quoted coefficient column), a plain-text summary
// sidecar, an optional SVG error chart, and the space-time profile dump.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "icpde/dataset.hpp"
#include "icpde/metrics.hpp"

namespace icpde {

// The coefficient description contains commas, so the field is CSV-quoted.
inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::filesystem::path report_csv_path(const std::filesystem::path& dir,
                                             const std::string& id) {
  return dir / ("report_" + id + ".csv");
}

inline std::filesystem::path write_report_csv(const ExperimentReport& r,
                                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string body = "alpha,abs_err,rel_err\n";
  for (const auto& row : r.rows) {
    body += csv_quote(describe(row.params));
    body += ',';
    detail::append_g17(body, row.err.abs);
    body += ',';
    detail::append_g17(body, row.err.rel);
    body += '\n';
  }
  const auto path = report_csv_path(dir, r.id);
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << body)) throw Error("config", "cannot write " + path.string());
  return path;
}

inline std::filesystem::path write_report_summary(const ExperimentReport& r,
                                                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string body;
  auto line = [&body](const char* key, double v) {
    body += key;
    body += " = ";
    detail::append_g17(body, v);
    body += '\n';
  };
  body += "id = " + r.id + "\n";
  body += "rows = " + std::to_string(r.rows.size()) + "\n";
  line("mean_abs_err", r.mean_abs);
  line("mean_rel_err", r.mean_rel);
  line("std_abs_err", r.std_abs);
  line("std_rel_err", r.std_rel);
  line("wall_seconds", r.wall_seconds);
  body += "config = " + r.config_note + "\n";
  const auto path = dir / ("report_" + r.id + "_summary.txt");
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << body)) throw Error("config", "cannot write " + path.string());
  return path;
}

struct ParsedReport {
  std::vector<std::string> alpha;
  std::vector<double> abs_err;
  std::vector<double> rel_err;
};

inline ParsedReport parse_report_csv(const std::filesystem::path& path) {
  const std::string text = detail::read_file_bytes(path);
  ParsedReport out;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (header) {
      if (line != "alpha,abs_err,rel_err")
        throw Error("data_format", "unexpected report header in " + path.string());
      header = false;
      continue;
    }
    if (line.front() != '"') throw Error("data_format", "unquoted coefficient field");
    const std::size_t close = line.find('"', 1);
    if (close == std::string_view::npos || close + 1 >= line.size() || line[close + 1] != ',')
      throw Error("data_format", "malformed report row");
    out.alpha.emplace_back(line.substr(1, close - 1));
    const char* p = line.data() + close + 2;
    char* end = nullptr;
    out.abs_err.push_back(std::strtod(p, &end));
    if (end == p || *end != ',') throw Error("data_format", "malformed report row");
    p = end + 1;
    out.rel_err.push_back(std::strtod(p, &end));
    if (end == p) throw Error("data_format", "malformed report row");
  }
  return out;
}

// Space-time profile dump for a single coefficient value.
inline std::filesystem::path write_profile_csv(const Eigen::MatrixXd& profile,
                                               const std::filesystem::path& dir,
                                               const std::string& tag) {
  if (profile.rows() != 4) throw Error("shape_mismatch", "profile must have 4 rows");
  std::filesystem::create_directories(dir);
  std::string body = "x,t,predicted,reference\n";
  for (Eigen::Index j = 0; j < profile.cols(); ++j) {
    for (Eigen::Index i = 0; i < 4; ++i) {
      detail::append_g17(body, profile(i, j));
      body += i == 3 ? '\n' : ',';
    }
  }
  const auto path = dir / ("profile_" + tag + ".csv");
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << body)) throw Error("config", "cannot write " + path.string());
  return path;
}

namespace detail {

inline void append_svg_num(std::string& s, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  s += buf;
}

}  // namespace detail

// Minimal line chart of per-row relative error. Self-contained SVG, no deps.
inline std::filesystem::path write_report_svg(const ExperimentReport& r,
                                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const double w = 640, h = 360, ml = 60, mr = 20, mt = 30, mb = 40;
  double ymax = 0;
  for (const auto& row : r.rows)
    if (std::isfinite(row.err.rel)) ymax = std::max(ymax, row.err.rel);
  if (ymax == 0) ymax = 1;
  ymax *= 1.1;

  const std::size_t n = r.rows.size();
  auto px = [&](std::size_t i) {
    return ml + (n > 1 ? (w - ml - mr) * double(i) / double(n - 1) : (w - ml - mr) / 2);
  };
  auto py = [&](double v) { return h - mb - (h - mt - mb) * v / ymax; };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" "
                  "viewBox=\"0 0 640 360\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"640\" height=\"360\" fill=\"white\"/>\n";
  auto axis_line = [&](double x1, double y1, double x2, double y2) {
    s += "<line stroke=\"black\" x1=\"";
    detail::append_svg_num(s, x1);
    s += "\" y1=\"";
    detail::append_svg_num(s, y1);
    s += "\" x2=\"";
    detail::append_svg_num(s, x2);
    s += "\" y2=\"";
    detail::append_svg_num(s, y2);
    s += "\"/>\n";
  };
  axis_line(ml, mt, ml, h - mb);
  axis_line(ml, h - mb, w - mr, h - mb);
  s += "<text x=\"8\" y=\"20\">" + r.id + " relative error</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = ymax * k / 4;
    s += "<text x=\"4\" y=\"";
    detail::append_svg_num(s, py(v) + 4);
    s += "\">";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    s += buf;
    s += "</text>\n";
  }
  if (n) {
    s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(r.rows[i].err.rel)) continue;
      detail::append_svg_num(s, px(i));
      s += ',';
      detail::append_svg_num(s, py(r.rows[i].err.rel));
      s += ' ';
    }
    s += "\"/>\n";
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(r.rows[i].err.rel)) continue;
      s += "<circle r=\"2.5\" fill=\"";
      s += r.rows[i].extrapolated ? "firebrick" : "steelblue";
      s += "\" cx=\"";
      detail::append_svg_num(s, px(i));
      s += "\" cy=\"";
      detail::append_svg_num(s, py(r.rows[i].err.rel));
      s += "\"/>\n";
    }
  }
  s += "</svg>\n";
  const auto path = dir / ("report_" + r.id + ".svg");
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << s)) throw Error("config", "cannot write " + path.string());
  return path;
}

inline void write_report_files(const ExperimentReport& r, const std::filesystem::path& dir,
                               bool svg = false) {
  write_report_csv(r, dir);
  write_report_summary(r, dir);
  if (svg) write_report_svg(r, dir);
}

}  // namespace icpde
