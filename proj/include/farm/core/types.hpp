#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "farm/core/grid.hpp"

namespace farm {

enum class AntennaType { Iso, Dir30, Dir60, Dir120 };

std::string to_string(AntennaType type);
AntennaType parse_antenna_type(const std::string& text);
/// Half-power beamwidth in degrees; 360 for the isotropic pattern.
double hpbw_degrees(AntennaType type);

/// Base-station configuration c = (f_c, a) plus position and power.
struct BsConfig {
  VoxelCoord p_tx{0, 0, 0};
  double tx_power_dbm = 30.0;
  double carrier_hz = 3.5e9;
  AntennaType antenna = AntennaType::Iso;
  double azimuth = 0.0;    // radians
  double elevation = 0.0;  // radians

  void validate(const VoxelGridSpec& spec) const;
  bool operator==(const BsConfig&) const = default;
};

struct SparseObservation {
  std::vector<std::size_t> indices;
  std::vector<double> values;  // dBm
  double sample_rate = 1.0;

  std::size_t size() const { return indices.size(); }
  void validate(const VoxelGridSpec& spec) const;
};

void to_json(nlohmann::json& j, const VoxelGridSpec& spec);
void from_json(const nlohmann::json& j, VoxelGridSpec& spec);
void to_json(nlohmann::json& j, const NormRange& norm);
void from_json(const nlohmann::json& j, NormRange& norm);
void to_json(nlohmann::json& j, const BsConfig& bs);
void from_json(const nlohmann::json& j, BsConfig& bs);

}  // namespace farm
