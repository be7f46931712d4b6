#include "farm/app/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "farm/core/error.hpp"
#include "farm/core/io.hpp"

namespace farm::app {

namespace fs = std::filesystem;

std::vector<LabeledReport> collect_reports(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidArgument(dir.string() + ": not a directory");
  std::vector<LabeledReport> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    nlohmann::json j;
    try {
      j = io::read_json(e.path());
    } catch (const IoError&) {
      continue;
    }
    if (!j.is_object() || j.value("kind", "") != "farm-metrics") continue;
    out.push_back({j.at("label").get<std::string>(), j.at("count").get<std::size_t>(),
                   eval::metrics_report_from_json(j.at("average"))});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  return out;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<double>& x, const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& series) {
  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};
  double x0 = x.empty() ? 0 : *std::min_element(x.begin(), x.end());
  double x1 = x.empty() ? 1 : *std::max_element(x.begin(), x.end());
  double y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (double v : s)
      if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
  if (!std::isfinite(y0)) y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto py = [&](double v) { return kTop + (y1 - v) / (y1 - y0) * (kH - kTop - kBottom); };

  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
    << "</text>\n";
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\"" << kH - kBottom
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
    << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = y0 + (y1 - y0) * k / 4;
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">" << std::setprecision(2) << v
      << "</text>\n";
  }
  for (double v : x) {
    o << "<text x=\"" << px(v) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\">" << v << "</text>\n";
  }
  o << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">"
    << xml_escape(x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << (kTop + kH - kBottom) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % (sizeof(kColors) / sizeof(kColors[0]))];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < x.size() && i < series[s].size(); ++i) {
      if (std::isfinite(series[s][i])) o << px(x[i]) << "," << py(series[s][i]) << " ";
    }
    o << "\"/>\n";
    const double ly = kTop + 18.0 * static_cast<double>(s);
    o << "<line x1=\"" << kW - kRight + 12 << "\" y1=\"" << ly << "\" x2=\"" << kW - kRight + 32 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kW - kRight + 38 << "\" y=\"" << ly + 4 << "\">" << xml_escape(names[s]) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

nlohmann::json write_report(const std::vector<LabeledReport>& reports, const fs::path& out) {
  require(!reports.empty(), "report: no metrics documents found");
  fs::create_directories(out);

  std::ostringstream summary;
  summary << std::setprecision(10);
  summary << "label,count,nmse_db,rmse_db,psnr_db,ssim,r\n";
  for (const auto& r : reports) {
    const auto& a = r.average;
    summary << csv_escape(r.label) << ',' << r.count << ',' << a.nmse_db << ',' << a.rmse << ',' << a.psnr_db << ','
            << a.ssim << ',' << a.r << '\n';
  }
  io::write_text(out / "summary.csv", summary.str());

  std::ostringstream heights;
  heights << std::setprecision(10);
  heights << "label,height,nmse_db,rmse_db,psnr_db,ssim\n";
  std::vector<double> x;
  for (const auto& s : reports.front().average.per_height) x.push_back(s.height);
  std::vector<std::string> names;
  std::vector<std::vector<double>> nmse_series, ssim_series;
  for (const auto& r : reports) {
    names.push_back(r.label);
    nmse_series.emplace_back();
    ssim_series.emplace_back();
    for (const auto& s : r.average.per_height) {
      heights << csv_escape(r.label) << ',' << s.height << ',' << s.nmse_db << ',' << s.rmse << ',' << s.psnr_db
              << ',' << s.ssim << '\n';
      nmse_series.back().push_back(s.nmse_db);
      ssim_series.back().push_back(s.ssim);
    }
  }
  io::write_text(out / "per_height.csv", heights.str());
  io::write_text(out / "per_height_nmse.svg",
                 line_chart_svg("NMSE by altitude level", "height level", "NMSE (dB)", x, names, nmse_series));
  io::write_text(out / "per_height_ssim.svg",
                 line_chart_svg("SSIM by altitude level", "height level", "SSIM", x, names, ssim_series));

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : reports) {
    rows.push_back({{"label", r.label}, {"count", r.count}, {"nmse_db", r.average.nmse_db},
                    {"ssim", r.average.ssim}});
  }
  return {{"out", out.string()},
          {"files", {"summary.csv", "per_height.csv", "per_height_nmse.svg", "per_height_ssim.svg"}},
          {"rows", rows}};
}

}  // namespace farm::app
