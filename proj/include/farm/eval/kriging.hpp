#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "farm/core/grid.hpp"
#include "farm/core/types.hpp"

namespace farm::eval {

using Point3 = std::array<double, 3>;

/// gamma(h) = c0 + c1 (1 - exp(-h / a)), with gamma(0) = c0.
struct VariogramModel {
  double nugget = 0.0;
  double sill = 1.0;
  double range = 1.0;

  double operator()(double h) const;
  void validate() const;
};

struct EmpiricalVariogram {
  std::vector<double> lag;        // mean pair distance per non-empty bin
  std::vector<double> gamma;      // half mean squared difference
  std::vector<std::size_t> pairs;
};

/// Pair semivariances in `bins` equal-width bins up to half the largest separation.
EmpiricalVariogram empirical_variogram(const std::vector<Point3>& points, const std::vector<double>& values,
                                       int bins = 15);

/// Pair-count weighted least squares fit of the exponential model. A given nugget is held fixed.
VariogramModel fit_variogram(const EmpiricalVariogram& empirical, std::optional<double> nugget = std::nullopt);

/// Ordinary kriging system over a fixed sample set.
class OrdinaryKriging {
 public:
  OrdinaryKriging(std::vector<Point3> points, std::vector<double> values, VariogramModel model);

  /// True when the system could not be solved and queries use inverse-distance weighting.
  bool singular() const { return singular_; }
  /// Weights for one query (size S); nullopt when the system is singular.
  std::optional<Eigen::VectorXd> weights(const Point3& query) const;
  double predict(const Point3& query) const;

 private:
  std::vector<Point3> points_;
  std::vector<double> values_;
  VariogramModel model_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::VectorXd dual_;  // A^-1 [z; 0]
  bool singular_ = false;
};

/// Inverse-distance weighting with power p; exact at sample locations.
double idw_predict(const std::vector<Point3>& points, const std::vector<double>& values, const Point3& query,
                   double power = 2.0);

struct KrigingOptions {
  int bins = 15;
  std::size_t max_neighbors = 2000;
  std::optional<double> nugget;  // fixes the nugget instead of fitting it
  double idw_power = 2.0;
  int threads = 0;
};

struct KrigingResult {
  ArmVolume volume;
  VariogramModel model;
  std::size_t fallback_queries = 0;
  nlohmann::json metadata;
};

/// Voxel centers in meters.
Point3 voxel_center(const VoxelGridSpec& spec, std::size_t index);

/// Ordinary kriging of every voxel from the observations. Uses a single global system
/// up to max_neighbors samples, otherwise one system per block of queries built
/// from the samples nearest the block center.
KrigingResult kriging_predict(const SparseObservation& obs, const VoxelGridSpec& spec, const NormRange& norm,
                              const KrigingOptions& options = {});

}  // namespace farm::eval
