#include "farm/core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace farm {

void VoxelGridSpec::validate() const {
  require(L >= 1 && W >= 1 && H >= 1, "grid dimensions must be >= 1");
  require(delta > 0.0 && std::isfinite(delta), "voxel size delta must be positive");
}

VoxelCoord VoxelGridSpec::coord(std::size_t index) const {
  const int h = static_cast<int>(index % static_cast<std::size_t>(H));
  const std::size_t lw = index / static_cast<std::size_t>(H);
  const int w = static_cast<int>(lw % static_cast<std::size_t>(W));
  const int l = static_cast<int>(lw / static_cast<std::size_t>(W));
  return {l, w, h};
}

void NormRange::validate() const {
  if (!(max_dbm > min_dbm)) {
    throw InvalidArgument("degenerate normalization range: max (" + std::to_string(max_dbm) +
                          ") must exceed min (" + std::to_string(min_dbm) + ")");
  }
}

double NormRange::normalize(double dbm) const {
  const double unit = 2.0 * (dbm - min_dbm) / (max_dbm - min_dbm) - 1.0;
  return std::clamp(unit, -1.0, 1.0);
}

double NormRange::denormalize(double unit) const {
  return (unit + 1.0) * 0.5 * (max_dbm - min_dbm) + min_dbm;
}

Field normalize(const ArmVolume& volume, const NormRange& norm) {
  norm.validate();
  Field out(volume.spec());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = norm.normalize(volume.values[i]);
  return out;
}

Field normalize(const ArmVolume& volume) { return normalize(volume, volume.norm); }

ArmVolume denormalize(const Field& unit, const NormRange& norm) {
  norm.validate();
  ArmVolume out{Field(unit.spec()), norm};
  for (std::size_t i = 0; i < unit.size(); ++i) out.values[i] = norm.denormalize(unit[i]);
  return out;
}

void BuildingGrid::validate() const {
  const auto& s = spec();
  for (int l = 0; l < s.L; ++l) {
    for (int w = 0; w < s.W; ++w) {
      bool open_above = false;
      for (int h = 0; h < s.H; ++h) {
        const auto v = occupancy(l, w, h);
        require(v <= 1, "building occupancy must be binary");
        if (v == 0) {
          open_above = true;
        } else if (open_above) {
          throw InvalidArgument("building column (" + std::to_string(l) + "," + std::to_string(w) +
                                ") is not ground-attached");
        }
      }
    }
  }
}

double BuildingGrid::occupied_fraction() const {
  const auto& d = occupancy.data();
  const auto n = std::count_if(d.begin(), d.end(), [](std::uint8_t v) { return v != 0; });
  return static_cast<double>(n) / static_cast<double>(d.size());
}

}  // namespace farm
