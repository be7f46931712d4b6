#pragma once

#include <cstdint>

#include "farm/core/grid.hpp"
#include "farm/core/types.hpp"

namespace farm::synth {

struct SceneOptions {
  int min_footprint = 4;   // voxels per side
  int max_footprint = 12;
  int min_height = 1;      // levels
  int max_height = 0;      // 0 means 3/4 of the grid height
  int tx_candidates = 24;
  int los_probes = 96;
};

struct Scene {
  BuildingGrid buildings;
  BsConfig bs;
};

/// Random axis-aligned, ground-attached boxes.
BuildingGrid generate_buildings(std::uint64_t seed, const VoxelGridSpec& spec, int n_buildings,
                                const SceneOptions& options = {});

/// Picks the free voxel with the best line-of-sight count over random probe
/// voxels among random candidates. Directional boresight faces the grid center.
BsConfig place_transmitter(const BuildingGrid& buildings, std::uint64_t seed,
                           const SceneOptions& options = {});

Scene generate_scene(std::uint64_t seed, const VoxelGridSpec& spec, int n_buildings,
                     const SceneOptions& options = {});

}  // namespace farm::synth
