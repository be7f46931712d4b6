#include "farm/core/patch.hpp"

#include <string>

namespace farm {

PatchPlan::PatchPlan(const VoxelGridSpec& spec, const PatchShape& patch) : spec_(spec), patch_(patch) {
  spec_.validate();
  require(patch.l >= 1 && patch.w >= 1 && patch.h >= 1, "patch dimensions must be >= 1");
  if (spec.L % patch.l != 0 || spec.W % patch.w != 0 || spec.H % patch.h != 0) {
    throw InvalidArgument("grid " + std::to_string(spec.L) + "x" + std::to_string(spec.W) + "x" +
                          std::to_string(spec.H) + " is not divisible by patch " +
                          std::to_string(patch.l) + "x" + std::to_string(patch.w) + "x" +
                          std::to_string(patch.h));
  }
  dims_ = {spec.L / patch.l, spec.W / patch.w, spec.H / patch.h};
  coords_.reserve(static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]));
  for (int a = 0; a < dims_[0]; ++a)
    for (int b = 0; b < dims_[1]; ++b)
      for (int c = 0; c < dims_[2]; ++c) coords_.push_back({a, b, c});
}

int PatchPlan::patch_of(const VoxelCoord& voxel) const {
  require(spec_.contains(voxel), "voxel outside grid");
  return ((voxel[0] / patch_.l) * dims_[1] + voxel[1] / patch_.w) * dims_[2] + voxel[2] / patch_.h;
}

std::vector<std::size_t> PatchPlan::voxel_indices(int p) const {
  const auto& c = coord(p);
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(patch_.voxels()));
  for (int i = 0; i < patch_.l; ++i)
    for (int j = 0; j < patch_.w; ++j)
      for (int k = 0; k < patch_.h; ++k)
        out.push_back(spec_.index(c[0] * patch_.l + i, c[1] * patch_.w + j, c[2] * patch_.h + k));
  return out;
}

void PatchPlan::gather(const std::vector<double>& field, int p, std::span<double> out) const {
  const auto& c = coord(p);
  std::size_t n = 0;
  for (int i = 0; i < patch_.l; ++i)
    for (int j = 0; j < patch_.w; ++j) {
      const std::size_t base = spec_.index(c[0] * patch_.l + i, c[1] * patch_.w + j, c[2] * patch_.h);
      for (int k = 0; k < patch_.h; ++k) out[n++] = field[base + static_cast<std::size_t>(k)];
    }
}

void PatchPlan::scatter(std::span<const double> values, int p, std::vector<double>& field) const {
  const auto& c = coord(p);
  std::size_t n = 0;
  for (int i = 0; i < patch_.l; ++i)
    for (int j = 0; j < patch_.w; ++j) {
      const std::size_t base = spec_.index(c[0] * patch_.l + i, c[1] * patch_.w + j, c[2] * patch_.h);
      for (int k = 0; k < patch_.h; ++k) field[base + static_cast<std::size_t>(k)] = values[n++];
    }
}

}  // namespace farm
