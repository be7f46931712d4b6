#include "farm/synth/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "farm/core/rng.hpp"
#include "farm/synth/antenna.hpp"

namespace farm::synth {

void PropagationParams::validate() const {
  require(building_loss_db_per_m >= 0.0, "building penetration loss must be non-negative");
  if (shadowing) {
    require(shadowing->sigma_db >= 0.0, "shadowing sigma must be non-negative");
    require(shadowing->correlation_m > 0.0, "shadowing correlation length must be positive");
  }
}

double fspl_db(double distance_m, double carrier_hz, double constant_db) {
  require(distance_m > 0.0, "free-space path loss needs a positive distance");
  require(carrier_hz > 0.0, "free-space path loss needs a positive carrier frequency");
  return 20.0 * std::log10(distance_m) + 20.0 * std::log10(carrier_hz) + constant_db;
}

double tx_distance_m(const VoxelGridSpec& spec, const VoxelCoord& p_tx, const VoxelCoord& voxel) {
  const double dl = voxel[0] - p_tx[0];
  const double dw = voxel[1] - p_tx[1];
  const double dh = voxel[2] - p_tx[2];
  const double d = std::sqrt(dl * dl + dw * dw + dh * dh) * spec.delta;
  return d > 0.0 ? d : 0.5 * spec.delta;
}

double trace_attenuation(const BuildingGrid& buildings, const VoxelCoord& a, const VoxelCoord& b) {
  const auto& spec = buildings.spec();
  require(spec.contains(a) && spec.contains(b), "trace endpoints must lie inside the grid");
  if (a == b) return 0.0;

  std::array<double, 3> dir{};
  double length2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    dir[k] = static_cast<double>(b[k] - a[k]);
    length2 += dir[k] * dir[k];
  }
  const double length = std::sqrt(length2);

  // Parametric DDA over t in [0, 1] from the center of a to the center of b.
  constexpr double inf = std::numeric_limits<double>::infinity();
  VoxelCoord cell = a;
  std::array<int, 3> step{};
  std::array<double, 3> t_max{};
  std::array<double, 3> t_delta{};
  for (int k = 0; k < 3; ++k) {
    if (dir[k] > 0.0) {
      step[k] = 1;
      t_delta[k] = 1.0 / dir[k];
      t_max[k] = 0.5 / dir[k];
    } else if (dir[k] < 0.0) {
      step[k] = -1;
      t_delta[k] = -1.0 / dir[k];
      t_max[k] = -0.5 / dir[k];
    } else {
      t_delta[k] = inf;
      t_max[k] = inf;
    }
  }

  double t = 0.0;
  double inside = 0.0;
  while (true) {
    const double t_next = std::min({t_max[0], t_max[1], t_max[2], 1.0});
    if (spec.contains(cell) && buildings.occupied(cell[0], cell[1], cell[2])) inside += t_next - t;
    if (t_next >= 1.0) break;
    for (int k = 0; k < 3; ++k) {
      if (t_max[k] == t_next) {
        cell[k] += step[k];
        t_max[k] += t_delta[k];
      }
    }
    t = t_next;
  }
  return inside * length * spec.delta;
}

Field blockage_lengths(const BuildingGrid& buildings, const VoxelCoord& p_tx) {
  const auto& spec = buildings.spec();
  Field out(spec, 0.0);
  const auto& occ = buildings.occupancy.data();
  const bool empty = std::none_of(occ.begin(), occ.end(), [](std::uint8_t v) { return v != 0; });
  if (empty) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = trace_attenuation(buildings, p_tx, spec.coord(i));
  return out;
}

Field free_space_loss_db(const VoxelGridSpec& spec, const BsConfig& bs, double constant_db) {
  bs.validate(spec);
  Field out(spec);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto c = spec.coord(i);
    out[i] = fspl_db(tx_distance_m(spec, bs.p_tx, c), bs.carrier_hz, constant_db) - antenna_gain_toward(bs, c);
  }
  return out;
}

namespace {

void blur_axis(std::vector<double>& data, const VoxelGridSpec& spec, int axis, const std::vector<double>& kernel) {
  const int radius = static_cast<int>(kernel.size() / 2);
  const int dims[3] = {spec.L, spec.W, spec.H};
  std::vector<double> out(data.size(), 0.0);
  for (int l = 0; l < spec.L; ++l)
    for (int w = 0; w < spec.W; ++w)
      for (int h = 0; h < spec.H; ++h) {
        int c[3] = {l, w, h};
        const int center = c[axis];
        double acc = 0.0;
        for (int o = -radius; o <= radius; ++o) {
          c[axis] = std::clamp(center + o, 0, dims[axis] - 1);
          acc += kernel[static_cast<std::size_t>(o + radius)] * data[spec.index(c[0], c[1], c[2])];
        }
        out[spec.index(l, w, h)] = acc;
      }
  data.swap(out);
}

}  // namespace

Field shadowing_field(const VoxelGridSpec& spec, const Shadowing& shadowing) {
  Field field(spec);
  if (shadowing.sigma_db == 0.0) return field;
  Rng rng(shadowing.seed);
  for (auto& v : field.data()) v = rng.normal();

  const double sigma_vox = shadowing.correlation_m / spec.delta;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_vox)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double norm = 0.0;
  for (int o = -radius; o <= radius; ++o) {
    const double v = std::exp(-0.5 * o * o / (sigma_vox * sigma_vox));
    kernel[static_cast<std::size_t>(o + radius)] = v;
    norm += v;
  }
  for (auto& v : kernel) v /= norm;
  for (int axis = 0; axis < 3; ++axis) blur_axis(field.data(), spec, axis, kernel);

  double mean = 0.0;
  for (double v : field.data()) mean += v;
  mean /= static_cast<double>(field.size());
  double var = 0.0;
  for (double v : field.data()) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / static_cast<double>(field.size()));
  for (auto& v : field.data()) v = stddev > 0.0 ? (v - mean) / stddev * shadowing.sigma_db : 0.0;
  return field;
}

ArmVolume render_arm(const BuildingGrid& buildings, const BsConfig& bs, const PropagationParams& params,
                     const NormRange& norm, const Field* blockage) {
  const auto& spec = buildings.spec();
  bs.validate(spec);
  params.validate();
  Field lengths = blockage ? *blockage : blockage_lengths(buildings, bs.p_tx);
  require(lengths.spec() == spec, "blockage field does not match the building grid");

  ArmVolume out{Field(spec), norm};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const auto c = spec.coord(i);
    const double loss = fspl_db(tx_distance_m(spec, bs.p_tx, c), bs.carrier_hz, params.fspl_constant_db) +
                        params.building_loss_db_per_m * lengths[i];
    out.values[i] = bs.tx_power_dbm + antenna_gain_toward(bs, c) - loss;
  }
  if (params.shadowing && params.shadowing->sigma_db > 0.0) {
    const Field shadow = shadowing_field(spec, *params.shadowing);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += shadow[i];
  }
  return out;
}

}  // namespace farm::synth
