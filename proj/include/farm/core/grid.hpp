#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "farm/core/error.hpp"

namespace farm {

/// Integer voxel coordinate (l, w, h).
using VoxelCoord = std::array<int, 3>;

/// Shape and placement of the voxel grid. Voxel (l, w, h) covers
/// [l, l+1) x [w, w+1) x [h, h+1) in units of delta, offset by origin.
struct VoxelGridSpec {
  int L = 1;
  int W = 1;
  int H = 1;
  double delta = 1.0;
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  void validate() const;
  std::size_t voxel_count() const {
    return static_cast<std::size_t>(L) * static_cast<std::size_t>(W) *
           static_cast<std::size_t>(H);
  }
  // C-order (l, w, h), h fastest.
  std::size_t index(int l, int w, int h) const {
    return (static_cast<std::size_t>(l) * W + static_cast<std::size_t>(w)) * H +
           static_cast<std::size_t>(h);
  }
  VoxelCoord coord(std::size_t index) const;
  bool contains(const VoxelCoord& c) const {
    return c[0] >= 0 && c[0] < L && c[1] >= 0 && c[1] < W && c[2] >= 0 && c[2] < H;
  }
  bool operator==(const VoxelGridSpec&) const = default;
};

template <class T>
class VoxelArray {
 public:
  VoxelArray() = default;
  explicit VoxelArray(const VoxelGridSpec& spec, T fill = T{})
      : spec_(spec), data_(spec.voxel_count(), fill) {}
  VoxelArray(const VoxelGridSpec& spec, std::vector<T> data) : spec_(spec), data_(std::move(data)) {
    require(data_.size() == spec_.voxel_count(), "voxel array size does not match grid spec");
  }

  const VoxelGridSpec& spec() const { return spec_; }
  std::size_t size() const { return data_.size(); }
  T& operator()(int l, int w, int h) { return data_[spec_.index(l, w, h)]; }
  const T& operator()(int l, int w, int h) const { return data_[spec_.index(l, w, h)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const VoxelArray&) const = default;

 private:
  VoxelGridSpec spec_;
  std::vector<T> data_;
};

using Field = VoxelArray<double>;

/// Affine dBm <-> [-1, 1] map shared by a whole dataset.
struct NormRange {
  double min_dbm = -150.0;
  double max_dbm = -50.0;

  void validate() const;
  double span() const { return max_dbm - min_dbm; }
  /// Clamps to [-1, 1].
  double normalize(double dbm) const;
  double denormalize(double unit) const;
  bool operator==(const NormRange&) const = default;
};

struct ArmVolume {
  Field values;  // dBm
  NormRange norm;

  const VoxelGridSpec& spec() const { return values.spec(); }
};

struct BuildingGrid {
  VoxelArray<std::uint8_t> occupancy;

  const VoxelGridSpec& spec() const { return occupancy.spec(); }
  bool occupied(int l, int w, int h) const { return occupancy(l, w, h) != 0; }
  /// Values in {0, 1} and every column is ground-attached.
  void validate() const;
  double occupied_fraction() const;
};

Field normalize(const ArmVolume& volume, const NormRange& norm);
Field normalize(const ArmVolume& volume);
ArmVolume denormalize(const Field& unit, const NormRange& norm);

}  // namespace farm
