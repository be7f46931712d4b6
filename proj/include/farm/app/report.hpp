#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "farm/eval/metrics.hpp"

namespace farm::app {

struct LabeledReport {
  std::string label;
  std::size_t count = 0;
  eval::MetricsReport average;
};

/// Every metrics document (kind "farm-metrics") below dir, sorted by label.
std::vector<LabeledReport> collect_reports(const std::filesystem::path& dir);

/// Writes summary.csv, per_height.csv and per-height SVG charts (NMSE, SSIM) to out.
nlohmann::json write_report(const std::vector<LabeledReport>& reports, const std::filesystem::path& out);

/// Minimal line chart: one polyline per series over a shared x axis.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<double>& x, const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& series);

}  // namespace farm::app
