#pragma once

#include <cstdint>
#include <optional>

#include "farm/core/grid.hpp"
#include "farm/core/types.hpp"

namespace farm::synth {

inline constexpr double kFreeSpaceConstantDb = -147.55;

struct Shadowing {
  double sigma_db = 0.0;
  double correlation_m = 20.0;
  std::uint64_t seed = 0;
};

struct PropagationParams {
  double fspl_constant_db = kFreeSpaceConstantDb;
  double building_loss_db_per_m = 1.5;
  std::optional<Shadowing> shadowing;

  void validate() const;
};

/// 20 log10(d) + 20 log10(f) + C, with d in meters and f in Hz.
double fspl_db(double distance_m, double carrier_hz, double constant_db = kFreeSpaceConstantDb);

/// Transmitter-to-voxel distance in meters; zero distance is clamped to delta / 2.
double tx_distance_m(const VoxelGridSpec& spec, const VoxelCoord& p_tx, const VoxelCoord& voxel);

/// Length in meters of the center-to-center segment a -> b that lies inside
/// occupied voxels, by 3D DDA traversal.
double trace_attenuation(const BuildingGrid& buildings, const VoxelCoord& a, const VoxelCoord& b);

/// Per-voxel penetration length (meters) from the transmitter.
Field blockage_lengths(const BuildingGrid& buildings, const VoxelCoord& p_tx);

/// Per-voxel fspl(d) - g(a) in dB: the free-space loss grid.
Field free_space_loss_db(const VoxelGridSpec& spec, const BsConfig& bs,
                         double constant_db = kFreeSpaceConstantDb);

/// Zero-mean Gaussian field with standard deviation sigma and a Gaussian
/// smoothing kernel at the requested correlation length.
Field shadowing_field(const VoxelGridSpec& spec, const Shadowing& shadowing);

/// r_i = P_tx + g_i - fspl(d_i) - alpha_b * blockage_i (+ shadowing).
/// Pass precomputed blockage lengths to reuse them across configurations.
ArmVolume render_arm(const BuildingGrid& buildings, const BsConfig& bs, const PropagationParams& params,
                     const NormRange& norm = {}, const Field* blockage = nullptr);

}  // namespace farm::synth
