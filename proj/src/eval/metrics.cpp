#include "farm/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "farm/core/error.hpp"

namespace farm::eval {

double to_db(double ratio) { return 10.0 * std::log10(std::max(ratio, kRatioFloor)); }

namespace {

void check_pair(const Field& truth, const Field& pred) {
  require(truth.spec() == pred.spec(), "prediction and ground truth have different shapes");
  require(truth.size() > 0, "empty volume");
}

}  // namespace

double mse(const Field& truth, const Field& pred) {
  check_pair(truth, pred);
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += (truth[i] - pred[i]) * (truth[i] - pred[i]);
  return s / static_cast<double>(truth.size());
}

double rmse(const Field& truth, const Field& pred) { return std::sqrt(mse(truth, pred)); }

Nmse nmse(const Field& truth, const Field& pred) {
  check_pair(truth, pred);
  double err = 0.0, energy = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    err += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    energy += truth[i] * truth[i];
  }
  require(energy > 0.0, "nmse: ground truth has zero energy");
  const double ratio = err / energy;
  return {ratio, to_db(ratio)};
}

double psnr(double mse_value, double r) {
  require(r > 0.0, "psnr: dynamic range must be positive");
  require(mse_value >= 0.0, "psnr: negative mse");
  return -to_db(mse_value / (r * r));
}

double ssim(const Field& truth, const Field& pred, double r, const SsimWindow& win) {
  check_pair(truth, pred);
  require(r > 0.0, "ssim: dynamic range must be positive");
  const auto& spec = truth.spec();
  require(win.l >= 1 && win.w >= 1 && win.h >= 1 && win.stride_l >= 1 && win.stride_w >= 1 && win.stride_h >= 1,
          "ssim: window and stride must be positive");
  require(spec.L >= win.l && spec.W >= win.w && spec.H >= win.h, "ssim: volume smaller than one window");
  const double c1 = (kSsimK1 * r) * (kSsimK1 * r);
  const double c2 = (kSsimK2 * r) * (kSsimK2 * r);
  const double n = static_cast<double>(win.l) * win.w * win.h;

  double total = 0.0;
  long windows = 0;
  for (int l0 = 0; l0 + win.l <= spec.L; l0 += win.stride_l) {
    for (int w0 = 0; w0 + win.w <= spec.W; w0 += win.stride_w) {
      for (int h0 = 0; h0 + win.h <= spec.H; h0 += win.stride_h) {
        double sx = 0, sy = 0;
        for (int l = l0; l < l0 + win.l; ++l)
          for (int w = w0; w < w0 + win.w; ++w)
            for (int h = h0; h < h0 + win.h; ++h) {
              sx += truth(l, w, h);
              sy += pred(l, w, h);
            }
        const double mx = sx / n, my = sy / n;
        double vx = 0, vy = 0, cxy = 0;
        for (int l = l0; l < l0 + win.l; ++l)
          for (int w = w0; w < w0 + win.w; ++w)
            for (int h = h0; h < h0 + win.h; ++h) {
              const double dx = truth(l, w, h) - mx, dy = pred(l, w, h) - my;
              vx += dx * dx;
              vy += dy * dy;
              cxy += dx * dy;
            }
        vx /= n;
        vy /= n;
        cxy /= n;
        total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++windows;
      }
    }
  }
  return total / static_cast<double>(windows);
}

Field height_slice(const Field& f, int h) {
  const auto& spec = f.spec();
  require(h >= 0 && h < spec.H, "height index out of range");
  VoxelGridSpec s = spec;
  s.H = 1;
  Field out(s);
  for (int l = 0; l < spec.L; ++l)
    for (int w = 0; w < spec.W; ++w) out(l, w, 0) = f(l, w, h);
  return out;
}

MetricsReport evaluate(const Field& pred, const Field& truth, double r) {
  check_pair(truth, pred);
  MetricsReport rep;
  rep.r = r;
  rep.mse = mse(truth, pred);
  const Nmse n = nmse(truth, pred);
  rep.nmse = n.ratio;
  rep.nmse_db = n.db;
  rep.rmse = std::sqrt(rep.mse);
  rep.psnr_db = psnr(rep.mse, r);
  rep.ssim = ssim(truth, pred, r);
  for (int h = 0; h < truth.spec().H; ++h) {
    const Field t = height_slice(truth, h);
    const Field p = height_slice(pred, h);
    SliceMetrics s;
    s.height = h;
    s.mse = mse(t, p);
    s.nmse_db = nmse(t, p).db;
    s.rmse = std::sqrt(s.mse);
    s.psnr_db = psnr(s.mse, r);
    s.ssim = ssim(t, p, r, SsimWindow::slice());
    rep.per_height.push_back(s);
  }
  return rep;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : r.per_height) {
    rows.push_back({{"height", s.height},
                    {"mse", s.mse},
                    {"nmse_db", s.nmse_db},
                    {"rmse", s.rmse},
                    {"psnr_db", s.psnr_db},
                    {"ssim", s.ssim}});
  }
  return {{"mse", r.mse},         {"nmse", r.nmse}, {"nmse_db", r.nmse_db}, {"rmse", r.rmse},
          {"psnr_db", r.psnr_db}, {"ssim", r.ssim}, {"r", r.r},             {"per_height", rows}};
}

MetricsReport metrics_report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  try {
    r.mse = j.at("mse").get<double>();
    r.nmse = j.at("nmse").get<double>();
    r.nmse_db = j.at("nmse_db").get<double>();
    r.rmse = j.at("rmse").get<double>();
    r.psnr_db = j.at("psnr_db").get<double>();
    r.ssim = j.at("ssim").get<double>();
    r.r = j.at("r").get<double>();
    for (const auto& row : j.at("per_height")) {
      r.per_height.push_back({row.at("height").get<int>(), row.at("mse").get<double>(),
                              row.at("nmse_db").get<double>(), row.at("rmse").get<double>(),
                              row.at("psnr_db").get<double>(), row.at("ssim").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed metrics report: ") + e.what());
  }
  return r;
}

MetricsReport average(const std::vector<MetricsReport>& reports) {
  require(!reports.empty(), "nothing to average");
  MetricsReport out;
  out.per_height = reports.front().per_height;
  for (auto& s : out.per_height) s = SliceMetrics{s.height};
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    require(r.per_height.size() == out.per_height.size(), "reports disagree on the number of heights");
    out.mse += r.mse / n;
    out.nmse += r.nmse / n;
    out.nmse_db += r.nmse_db / n;
    out.rmse += r.rmse / n;
    out.psnr_db += r.psnr_db / n;
    out.ssim += r.ssim / n;
    out.r = r.r;
    for (std::size_t h = 0; h < r.per_height.size(); ++h) {
      auto& o = out.per_height[h];
      const auto& s = r.per_height[h];
      o.mse += s.mse / n;
      o.nmse_db += s.nmse_db / n;
      o.rmse += s.rmse / n;
      o.psnr_db += s.psnr_db / n;
      o.ssim += s.ssim / n;
    }
  }
  return out;
}

}  // namespace farm::eval
