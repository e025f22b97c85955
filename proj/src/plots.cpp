// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#include "stfilm/plots.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace stfilm {

namespace {

constexpr double kW = 640, kH = 420;
constexpr double kMargin = 56;

struct Series {
  std::vector<double> x, y;
  std::string color;
  std::string label;
};

double nice_min(const std::vector<Series>& ss, bool x_axis) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : ss)
    for (double v : x_axis ? s.x : s.y) m = std::min(m, v);
  return std::isfinite(m) ? m : 0.0;
}

double nice_max(const std::vector<Series>& ss, bool x_axis) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& s : ss)
    for (double v : x_axis ? s.x : s.y) m = std::max(m, v);
  return std::isfinite(m) ? m : 1.0;
}

std::string line_plot(const std::vector<Series>& series, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::string& annotation = "") {
  double x0 = nice_min(series, true), x1 = nice_max(series, true);
  double y0 = nice_min(series, false), y1 = nice_max(series, false);
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  auto px = [&](double x) {
    return kMargin + (x - x0) / (x1 - x0) * (kW - 2 * kMargin);
  };
  auto py = [&](double y) {
    return kH - kMargin - (y - y0) / (y1 - y0) * (kH - 2 * kMargin);
  };

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
      << "' viewBox='0 0 " << kW << ' ' << kH << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << kW / 2 << "' y='24' text-anchor='middle' font-size='15'>"
      << title << "</text>\n";
  // axes
  svg << "<line x1='" << kMargin << "' y1='" << kH - kMargin << "' x2='" << kW - kMargin
      << "' y2='" << kH - kMargin << "' stroke='black'/>\n";
  svg << "<line x1='" << kMargin << "' y1='" << kMargin << "' x2='" << kMargin
      << "' y2='" << kH - kMargin << "' stroke='black'/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x0 + (x1 - x0) * t / 4.0;
    const double fy = y0 + (y1 - y0) * t / 4.0;
    svg << "<text x='" << px(fx) << "' y='" << kH - kMargin + 18
        << "' text-anchor='middle' font-size='10'>" << fx << "</text>\n";
    svg << "<text x='" << kMargin - 6 << "' y='" << py(fy) + 3
        << "' text-anchor='end' font-size='10'>" << fy << "</text>\n";
  }
  svg << "<text x='" << kW / 2 << "' y='" << kH - 12
      << "' text-anchor='middle' font-size='12'>" << xlabel << "</text>\n";
  svg << "<text x='16' y='" << kH / 2 << "' text-anchor='middle' font-size='12' "
      << "transform='rotate(-90 16 " << kH / 2 << ")'>" << ylabel << "</text>\n";

  double legend_y = kMargin + 4;
  for (const Series& s : series) {
    svg << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.2' points='";
    for (size_t i = 0; i < s.x.size(); ++i)
      svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    svg << "'/>\n";
    if (!s.label.empty()) {
      svg << "<text x='" << kW - kMargin - 4 << "' y='" << legend_y
          << "' text-anchor='end' font-size='10' fill='" << s.color << "'>" << s.label
          << "</text>\n";
      legend_y += 13;
    }
  }
  if (!annotation.empty())
    svg << "<text x='" << kW / 2 << "' y='" << kMargin + 16
        << "' text-anchor='middle' font-size='12'>" << annotation << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
}

std::string color_for(size_t k) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[k % 8];
}

}  // namespace

void emit_plots(const EnsembleReport& report, const std::string& dir) {
  if (report.paths.empty()) return;
  std::filesystem::create_directories(dir);

  std::vector<Series> energy, entropy;
  for (size_t k = 0; k < report.paths.size(); ++k) {
    const PathRecord& p = report.paths[k];
    if (p.excluded || p.diagnostics.empty()) continue;
    Series se, ss;
    se.color = ss.color = color_for(k);
    if (k < 4) {
      se.label = "path " + std::to_string(k);
      ss.label = se.label;
    }
    for (const DiagnosticsRecord& d : p.diagnostics) {
      se.x.push_back(d.time);
      se.y.push_back(d.energy);
      ss.x.push_back(d.time);
      ss.y.push_back(d.entropy);
    }
    energy.push_back(std::move(se));
    entropy.push_back(std::move(ss));
  }
  if (!energy.empty())
    write_file(dir + "/energy_vs_time.svg",
               line_plot(energy, "Discrete energy along paths", "t", "E_h"));
  if (!entropy.empty())
    write_file(dir + "/entropy_vs_time.svg",
               line_plot(entropy, "Discrete entropy along paths", "t", "S_h"));

  if (!report.stopping_times.empty()) {
    // simple histogram over 12 bins
    std::vector<double> ts = report.stopping_times;
    std::sort(ts.begin(), ts.end());
    const double lo = ts.front(), hi = std::max(ts.back(), lo + 1e-12);
    const int bins = 12;
    std::vector<double> count(bins, 0.0);
    for (double t : ts) {
      int b = static_cast<int>((t - lo) / (hi - lo) * bins);
      count[std::clamp(b, 0, bins - 1)] += 1.0;
    }
    Series s;
    s.color = "#1f77b4";
    for (int b = 0; b < bins; ++b) {
      const double xl = lo + (hi - lo) * b / bins, xr = lo + (hi - lo) * (b + 1) / bins;
      s.x.insert(s.x.end(), {xl, xl, xr, xr});
      s.y.insert(s.y.end(), {0.0, count[b], count[b], 0.0});
    }
    write_file(dir + "/stopping_times.svg",
               line_plot({s}, "Stopping-time histogram", "t", "paths"));
  }
}

void emit_plots(const MassStudyReport& report, const std::string& dir) {
  if (report.h_values.empty()) return;
  std::filesystem::create_directories(dir);
  Series s;
  s.color = "#d62728";
  s.label = "E[sup |mean drift|]";
  for (size_t i = 0; i < report.h_values.size(); ++i) {
    s.x.push_back(std::log10(report.h_values[i]));
    s.y.push_back(std::log10(std::max(report.drifts[i].mean, 1e-300)));
  }
  std::ostringstream note;
  note << "fitted slope = " << report.slope;
  write_file(dir + "/mass_drift_loglog.svg",
             line_plot({s}, "Mass drift vs h (log-log)", "log10 h",
                       "log10 E[sup drift]", note.str()));
}

}  // namespace stfilm
