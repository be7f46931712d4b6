#include "farm/eval/kriging.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "farm/core/error.hpp"

namespace farm::eval {

namespace {

double distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

double VariogramModel::operator()(double h) const { return nugget + sill * (1.0 - std::exp(-h / range)); }

void VariogramModel::validate() const {
  require(nugget >= 0.0, "variogram nugget must be non-negative");
  require(sill > 0.0, "variogram sill must be positive");
  require(range > 0.0, "variogram range must be positive");
}

EmpiricalVariogram empirical_variogram(const std::vector<Point3>& points, const std::vector<double>& values,
                                       int bins) {
  require(points.size() == values.size(), "variogram: points and values differ in length");
  require(bins >= 1, "variogram: bin count must be positive");
  double max_d = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) max_d = std::max(max_d, distance(points[i], points[j]));
  require(max_d > 0.0, "variogram: all sample locations coincide");

  const double cutoff = 0.5 * max_d;
  const double width = cutoff / bins;
  std::vector<double> lag_sum(static_cast<std::size_t>(bins), 0.0), sq_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = distance(points[i], points[j]);
      if (d <= 0.0 || d > cutoff) continue;
      const auto b = std::min(static_cast<std::size_t>(d / width), static_cast<std::size_t>(bins - 1));
      const double diff = values[i] - values[j];
      lag_sum[b] += d;
      sq_sum[b] += diff * diff;
      ++count[b];
    }
  }
  EmpiricalVariogram ev;
  for (std::size_t b = 0; b < count.size(); ++b) {
    if (count[b] == 0) continue;
    ev.lag.push_back(lag_sum[b] / count[b]);
    ev.gamma.push_back(0.5 * sq_sum[b] / count[b]);
    ev.pairs.push_back(count[b]);
  }
  return ev;
}

VariogramModel fit_variogram(const EmpiricalVariogram& ev, std::optional<double> nugget) {
  require(!ev.lag.empty(), "variogram fit needs at least one populated bin");
  if (nugget) require(*nugget >= 0.0, "fixed nugget must be non-negative");
  const double max_lag = *std::max_element(ev.lag.begin(), ev.lag.end());
  const double min_lag = *std::min_element(ev.lag.begin(), ev.lag.end());
  const double max_gamma = *std::max_element(ev.gamma.begin(), ev.gamma.end());
  const double sill_floor = std::max(1e-12, 1e-9 * max_gamma);

  // For a fixed range the model is linear in (c0, c1): scan the range, solve the rest.
  VariogramModel best{0.0, sill_floor, max_lag};
  double best_sse = std::numeric_limits<double>::infinity();
  constexpr int kRangeSteps = 80;
  const double lo = std::log(min_lag / 3.0), hi = std::log(max_lag * 3.0);
  for (int s = 0; s <= kRangeSteps; ++s) {
    const double a = std::exp(lo + (hi - lo) * s / kRangeSteps);
    double sw = 0, sf = 0, sff = 0, sg = 0, sfg = 0;
    for (std::size_t i = 0; i < ev.lag.size(); ++i) {
      const double w = static_cast<double>(ev.pairs[i]);
      const double f = 1.0 - std::exp(-ev.lag[i] / a);
      sw += w;
      sf += w * f;
      sff += w * f * f;
      sg += w * ev.gamma[i];
      sfg += w * f * ev.gamma[i];
    }
    double c0 = 0.0, c1 = 0.0;
    if (nugget) {
      c0 = *nugget;
      c1 = sff > 0 ? (sfg - c0 * sf) / sff : 0.0;
    } else {
      const double det = sw * sff - sf * sf;
      if (std::abs(det) > 1e-300) {
        c0 = (sg * sff - sf * sfg) / det;
        c1 = (sw * sfg - sf * sg) / det;
      }
      if (c0 < 0.0 || std::abs(det) <= 1e-300) {
        c0 = 0.0;
        c1 = sff > 0 ? sfg / sff : 0.0;
      }
    }
    c1 = std::max(c1, sill_floor);
    double sse = 0.0;
    for (std::size_t i = 0; i < ev.lag.size(); ++i) {
      const double r = c0 + c1 * (1.0 - std::exp(-ev.lag[i] / a)) - ev.gamma[i];
      sse += static_cast<double>(ev.pairs[i]) * r * r;
    }
    if (sse < best_sse) {
      best_sse = sse;
      best = {c0, c1, a};
    }
  }
  return best;
}

OrdinaryKriging::OrdinaryKriging(std::vector<Point3> points, std::vector<double> values, VariogramModel model)
    : points_(std::move(points)), values_(std::move(values)), model_(model) {
  require(points_.size() == values_.size(), "kriging: points and values differ in length");
  require(!points_.empty(), "kriging: no samples");
  model_.validate();
  const auto n = static_cast<Eigen::Index>(points_.size());
  Eigen::MatrixXd a(n + 1, n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double g = model_(distance(points_[static_cast<std::size_t>(i)], points_[static_cast<std::size_t>(j)]));
      a(i, j) = a(j, i) = g;
    }
    a(i, n) = a(n, i) = 1.0;
  }
  a(n, n) = 0.0;
  lu_.compute(a);
  Eigen::VectorXd rhs(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = values_[static_cast<std::size_t>(i)];
  rhs(n) = 0.0;
  dual_ = lu_.solve(rhs);
  const double residual = (a * dual_ - rhs).norm();
  singular_ = !dual_.allFinite() || residual > 1e-6 * std::max(1.0, rhs.norm());
}

std::optional<Eigen::VectorXd> OrdinaryKriging::weights(const Point3& query) const {
  if (singular_) return std::nullopt;
  const auto n = static_cast<Eigen::Index>(points_.size());
  Eigen::VectorXd g(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = model_(distance(points_[static_cast<std::size_t>(i)], query));
  g(n) = 1.0;
  const Eigen::VectorXd w = lu_.solve(g);
  if (!w.allFinite()) return std::nullopt;
  return Eigen::VectorXd(w.head(n));
}

double OrdinaryKriging::predict(const Point3& query) const {
  if (singular_) return idw_predict(points_, values_, query);
  const auto n = static_cast<Eigen::Index>(points_.size());
  double s = dual_(n);
  for (Eigen::Index i = 0; i < n; ++i) s += dual_(i) * model_(distance(points_[static_cast<std::size_t>(i)], query));
  return s;
}

double idw_predict(const std::vector<Point3>& points, const std::vector<double>& values, const Point3& query,
                   double power) {
  require(!points.empty() && points.size() == values.size(), "idw: empty or mismatched samples");
  double num = 0.0, den = 0.0, exact = 0.0;
  int hits = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = distance(points[i], query);
    if (d == 0.0) {
      exact += values[i];
      ++hits;
      continue;
    }
    const double w = 1.0 / std::pow(d, power);
    num += w * values[i];
    den += w;
  }
  return hits > 0 ? exact / hits : num / den;
}

Point3 voxel_center(const VoxelGridSpec& spec, std::size_t index) {
  const auto c = spec.coord(index);
  return {(c[0] + 0.5) * spec.delta, (c[1] + 0.5) * spec.delta, (c[2] + 0.5) * spec.delta};
}

KrigingResult kriging_predict(const SparseObservation& obs, const VoxelGridSpec& spec, const NormRange& norm,
                              const KrigingOptions& options) {
  spec.validate();
  obs.validate(spec);
  require(obs.size() >= 4, "kriging needs at least 4 samples");
  require(options.max_neighbors >= 4, "kriging neighborhood must hold at least 4 samples");
  std::vector<Point3> points;
  for (auto i : obs.indices) points.push_back(voxel_center(spec, i));
  require(std::any_of(points.begin(), points.end(), [&](const Point3& p) { return p != points.front(); }),
          "kriging: all sample locations coincide");

  const EmpiricalVariogram ev = empirical_variogram(points, obs.values, options.bins);
  const VariogramModel model = fit_variogram(ev, options.nugget);

  // Query blocks: the whole grid, or octants when the sample set exceeds the neighborhood.
  const bool global = obs.size() <= options.max_neighbors;
  const int splits = global ? 1 : 2;
  struct Block {
    std::vector<std::size_t> queries;
    Point3 center{};
  };
  std::vector<Block> blocks(static_cast<std::size_t>(splits * splits * splits));
  for (std::size_t i = 0; i < spec.voxel_count(); ++i) {
    const auto c = spec.coord(i);
    const int b = ((c[0] * splits / spec.L) * splits + c[1] * splits / spec.W) * splits + c[2] * splits / spec.H;
    blocks[static_cast<std::size_t>(b)].queries.push_back(i);
  }
  for (auto& b : blocks) {
    for (auto q : b.queries) {
      const Point3 p = voxel_center(spec, q);
      for (int k = 0; k < 3; ++k) b.center[static_cast<std::size_t>(k)] += p[static_cast<std::size_t>(k)];
    }
    for (auto& v : b.center) v /= static_cast<double>(std::max<std::size_t>(1, b.queries.size()));
  }

  KrigingResult result{ArmVolume{Field(spec, 0.0), norm}, model, 0, {}};
  std::atomic<std::size_t> fallback{0};
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t bi = next++; bi < blocks.size(); bi = next++) {
      const Block& b = blocks[bi];
      if (b.queries.empty()) continue;
      std::vector<Point3> pts = points;
      std::vector<double> vals = obs.values;
      if (!global) {
        std::vector<std::size_t> order(points.size());
        std::iota(order.begin(), order.end(), 0);
        std::nth_element(order.begin(), order.begin() + static_cast<long>(options.max_neighbors), order.end(),
                         [&](std::size_t x, std::size_t y) {
                           const double dx = distance(points[x], b.center), dy = distance(points[y], b.center);
                           return dx < dy || (dx == dy && x < y);
                         });
        order.resize(options.max_neighbors);
        std::sort(order.begin(), order.end());
        pts.clear();
        vals.clear();
        for (auto k : order) {
          pts.push_back(points[k]);
          vals.push_back(obs.values[k]);
        }
      }
      const OrdinaryKriging ok(pts, vals, model);
      if (ok.singular()) fallback += b.queries.size();
      for (auto q : b.queries) {
        const Point3 p = voxel_center(spec, q);
        result.volume.values[q] = ok.singular() ? idw_predict(pts, vals, p, options.idw_power) : ok.predict(p);
      }
    }
  };
  const int threads = options.threads > 0 ? options.threads
                                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto workers = std::min<std::size_t>(blocks.size(), static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  result.fallback_queries = fallback;
  result.metadata = {{"method", "ordinary_kriging"},
                     {"variogram", {{"model", "exponential"}, {"nugget", model.nugget}, {"sill", model.sill},
                                    {"range_m", model.range}}},
                     {"bins", options.bins},
                     {"populated_bins", ev.lag.size()},
                     {"samples", obs.size()},
                     {"neighborhood", global ? "global" : "block"},
                     {"blocks", blocks.size()},
                     {"max_neighbors", options.max_neighbors},
                     {"fallback", result.fallback_queries > 0 ? "idw" : "none"},
                     {"fallback_queries", result.fallback_queries}};
  return result;
}

}  // namespace farm::eval
