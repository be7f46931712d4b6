#include "farm/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "farm/core/error.hpp"

namespace farm {

std::string to_string(AntennaType type) {
  switch (type) {
    case AntennaType::Iso: return "iso";
    case AntennaType::Dir30: return "dir30";
    case AntennaType::Dir60: return "dir60";
    case AntennaType::Dir120: return "dir120";
  }
  return "iso";
}

AntennaType parse_antenna_type(const std::string& text) {
  if (text == "iso") return AntennaType::Iso;
  if (text == "dir30") return AntennaType::Dir30;
  if (text == "dir60") return AntennaType::Dir60;
  if (text == "dir120") return AntennaType::Dir120;
  throw InvalidArgument("unknown antenna type '" + text + "' (expected iso|dir30|dir60|dir120)");
}

double hpbw_degrees(AntennaType type) {
  switch (type) {
    case AntennaType::Iso: return 360.0;
    case AntennaType::Dir30: return 30.0;
    case AntennaType::Dir60: return 60.0;
    case AntennaType::Dir120: return 120.0;
  }
  return 360.0;
}

void BsConfig::validate(const VoxelGridSpec& spec) const {
  require(spec.contains(p_tx), "transmitter position lies outside the grid");
  require(carrier_hz > 0.0 && std::isfinite(carrier_hz), "carrier frequency must be positive");
  require(std::isfinite(tx_power_dbm), "transmit power must be finite");
}

void SparseObservation::validate(const VoxelGridSpec& spec) const {
  require(indices.size() == values.size(), "observation indices and values differ in length");
  require(sample_rate > 0.0 && sample_rate <= 1.0, "sample rate must lie in (0, 1]");
  std::unordered_set<std::size_t> seen;
  for (auto i : indices) {
    require(i < spec.voxel_count(), "observation index outside grid");
    require(seen.insert(i).second, "duplicate observation index");
  }
}

void to_json(nlohmann::json& j, const VoxelGridSpec& s) {
  j = {{"L", s.L}, {"W", s.W}, {"H", s.H}, {"delta", s.delta}, {"origin", s.origin}};
}

void from_json(const nlohmann::json& j, VoxelGridSpec& s) {
  j.at("L").get_to(s.L);
  j.at("W").get_to(s.W);
  j.at("H").get_to(s.H);
  j.at("delta").get_to(s.delta);
  if (j.contains("origin")) j.at("origin").get_to(s.origin);
}

void to_json(nlohmann::json& j, const NormRange& n) {
  j = {{"min_dbm", n.min_dbm}, {"max_dbm", n.max_dbm}};
}

void from_json(const nlohmann::json& j, NormRange& n) {
  j.at("min_dbm").get_to(n.min_dbm);
  j.at("max_dbm").get_to(n.max_dbm);
}

void to_json(nlohmann::json& j, const BsConfig& b) {
  j = {{"p_tx", b.p_tx},           {"tx_power_dbm", b.tx_power_dbm}, {"carrier_hz", b.carrier_hz},
       {"antenna", to_string(b.antenna)}, {"azimuth", b.azimuth},     {"elevation", b.elevation}};
}

void from_json(const nlohmann::json& j, BsConfig& b) {
  j.at("p_tx").get_to(b.p_tx);
  j.at("tx_power_dbm").get_to(b.tx_power_dbm);
  j.at("carrier_hz").get_to(b.carrier_hz);
  b.antenna = parse_antenna_type(j.at("antenna").get<std::string>());
  j.at("azimuth").get_to(b.azimuth);
  j.at("elevation").get_to(b.elevation);
}

}  // namespace farm
