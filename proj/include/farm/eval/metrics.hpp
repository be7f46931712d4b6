#pragma once

#include <vector>

#include "json.hpp"

#include "farm/core/grid.hpp"

namespace farm::eval {

/// Lower bound applied to ratios before conversion to dB (gives -120 dB).
inline constexpr double kRatioFloor = 1e-12;

double to_db(double ratio);

double mse(const Field& truth, const Field& pred);
double rmse(const Field& truth, const Field& pred);

struct Nmse {
  double ratio = 0.0;
  double db = 0.0;
};
/// sum (R - R_hat)^2 / sum R^2. Rejects a zero-energy ground truth.
Nmse nmse(const Field& truth, const Field& pred);

/// 10 log10(r^2 / MSE), capped at 120 dB when MSE vanishes.
double psnr(double mse, double r);

/// Sliding-window geometry for SSIM, in voxels.
struct SsimWindow {
  int l = 8, w = 8, h = 4;
  int stride_l = 4, stride_w = 4, stride_h = 2;

  /// Window used on single altitude slices.
  static SsimWindow slice() { return {8, 8, 1, 4, 4, 1}; }
};

inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Mean SSIM over all window placements, with C1 = (K1 r)^2 and C2 = (K2 r)^2.
double ssim(const Field& truth, const Field& pred, double r, const SsimWindow& window = {});

/// One altitude level h as an (L, W, 1) field.
Field height_slice(const Field& f, int h);

struct SliceMetrics {
  int height = 0;
  double mse = 0.0;
  double nmse_db = 0.0;
  double rmse = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct MetricsReport {
  double mse = 0.0;
  double nmse = 0.0;
  double nmse_db = 0.0;
  double rmse = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double r = 0.0;
  std::vector<SliceMetrics> per_height;
};

/// Whole-volume metrics plus one row per altitude level.
MetricsReport evaluate(const Field& pred, const Field& truth, double r);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const nlohmann::json& j);

/// Mean of whole-volume scalars (nmse_db, rmse, psnr, ssim) and per-height rows.
MetricsReport average(const std::vector<MetricsReport>& reports);

}  // namespace farm::eval
