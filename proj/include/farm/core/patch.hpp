#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "farm/core/grid.hpp"

namespace farm {

struct PatchShape {
  int l = 1;
  int w = 1;
  int h = 1;

  int voxels() const { return l * w * h; }
  bool operator==(const PatchShape&) const = default;
};

/// Partition of a voxel grid into non-overlapping patches, enumerated in
/// row-major (l, w, h) order with h fastest. Coordinates are patch-grid indices.
class PatchPlan {
 public:
  PatchPlan(const VoxelGridSpec& spec, const PatchShape& patch);

  const VoxelGridSpec& spec() const { return spec_; }
  const PatchShape& patch() const { return patch_; }
  int count() const { return static_cast<int>(coords_.size()); }
  const VoxelCoord& grid_dims() const { return dims_; }
  const VoxelCoord& coord(int p) const { return coords_.at(static_cast<std::size_t>(p)); }
  const std::vector<VoxelCoord>& coords() const { return coords_; }
  int patch_of(const VoxelCoord& voxel) const;

  /// Voxel linear indices of patch p, ordered (l, w, h) with h fastest.
  std::vector<std::size_t> voxel_indices(int p) const;

  /// Copies patch p of a field into out (size patch().voxels()).
  void gather(const std::vector<double>& field, int p, std::span<double> out) const;
  void scatter(std::span<const double> values, int p, std::vector<double>& field) const;

 private:
  VoxelGridSpec spec_;
  PatchShape patch_;
  VoxelCoord dims_{};
  std::vector<VoxelCoord> coords_;
};

}  // namespace farm
