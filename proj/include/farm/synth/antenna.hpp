#pragma once

#include "farm/core/grid.hpp"
#include "farm/core/types.hpp"

namespace farm::synth {

/// Parabolic sector pattern with a front-to-back floor.
struct AntennaModel {
  AntennaType type = AntennaType::Iso;
  double g_max_dbi = 0.0;
  double hpbw_deg = 360.0;
  double a_max_db = 25.0;

  /// Gain table {iso: 0, 120: 8, 60: 12, 30: 15} dBi with A_max = 25 dB.
  static AntennaModel for_type(AntennaType type);
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double radians);

/// Gain in dBi for an offset (d_azimuth, d_elevation) from boresight, radians.
double antenna_gain(const AntennaModel& model, double d_azimuth, double d_elevation);

/// Gain from the transmitter toward a voxel. The transmitter's own voxel
/// is treated as boresight.
double antenna_gain_toward(const BsConfig& bs, const VoxelCoord& target);

}  // namespace farm::synth
