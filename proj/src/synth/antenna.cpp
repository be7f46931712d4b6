#include "farm/synth/antenna.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace farm::synth {

AntennaModel AntennaModel::for_type(AntennaType type) {
  switch (type) {
    case AntennaType::Iso: return {type, 0.0, 360.0, 25.0};
    case AntennaType::Dir120: return {type, 8.0, 120.0, 25.0};
    case AntennaType::Dir60: return {type, 12.0, 60.0, 25.0};
    case AntennaType::Dir30: return {type, 15.0, 30.0, 25.0};
  }
  return {};
}

double wrap_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(radians, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  if (r > std::numbers::pi) r -= two_pi;
  return r;
}

double antenna_gain(const AntennaModel& model, double d_azimuth, double d_elevation) {
  if (model.type == AntennaType::Iso) return 0.0;
  const double hpbw = model.hpbw_deg * std::numbers::pi / 180.0;
  const double az = wrap_angle(d_azimuth) / hpbw;
  const double el = wrap_angle(d_elevation) / hpbw;
  const double loss = std::min(12.0 * az * az, model.a_max_db) + std::min(12.0 * el * el, model.a_max_db);
  return std::max(model.g_max_dbi - loss, model.g_max_dbi - model.a_max_db);
}

double antenna_gain_toward(const BsConfig& bs, const VoxelCoord& target) {
  const auto model = AntennaModel::for_type(bs.antenna);
  if (model.type == AntennaType::Iso) return 0.0;
  const double dl = target[0] - bs.p_tx[0];
  const double dw = target[1] - bs.p_tx[1];
  const double dh = target[2] - bs.p_tx[2];
  if (dl == 0.0 && dw == 0.0 && dh == 0.0) return model.g_max_dbi;
  const double azimuth = std::atan2(dw, dl);
  const double elevation = std::atan2(dh, std::hypot(dl, dw));
  return antenna_gain(model, azimuth - bs.azimuth, elevation - bs.elevation);
}

}  // namespace farm::synth
