#include "farm/synth/scene.hpp"

#include <algorithm>
#include <cmath>

#include "farm/core/rng.hpp"
#include "farm/synth/propagation.hpp"

namespace farm::synth {

BuildingGrid generate_buildings(std::uint64_t seed, const VoxelGridSpec& spec, int n_buildings,
                                const SceneOptions& options) {
  spec.validate();
  require(n_buildings >= 0, "building count must be non-negative");
  Rng rng(seed);
  BuildingGrid grid{VoxelArray<std::uint8_t>(spec, 0)};
  const int max_h = options.max_height > 0 ? std::min(options.max_height, spec.H)
                                           : std::max(1, (3 * spec.H) / 4);
  const int min_h = std::clamp(options.min_height, 1, max_h);
  const int max_fp_l = std::min(options.max_footprint, spec.L);
  const int max_fp_w = std::min(options.max_footprint, spec.W);
  for (int b = 0; b < n_buildings; ++b) {
    const int fl = rng.uniform_int(std::min(options.min_footprint, max_fp_l), max_fp_l);
    const int fw = rng.uniform_int(std::min(options.min_footprint, max_fp_w), max_fp_w);
    const int l0 = rng.uniform_int(0, spec.L - fl);
    const int w0 = rng.uniform_int(0, spec.W - fw);
    const int height = rng.uniform_int(min_h, max_h);
    for (int l = l0; l < l0 + fl; ++l)
      for (int w = w0; w < w0 + fw; ++w)
        for (int h = 0; h < height; ++h) grid.occupancy(l, w, h) = 1;
  }
  return grid;
}

BsConfig place_transmitter(const BuildingGrid& buildings, std::uint64_t seed, const SceneOptions& options) {
  const auto& spec = buildings.spec();
  Rng rng(seed);
  std::vector<VoxelCoord> free;
  for (std::size_t i = 0; i < spec.voxel_count(); ++i) {
    const auto c = spec.coord(i);
    if (!buildings.occupied(c[0], c[1], c[2])) free.push_back(c);
  }
  if (free.empty()) throw InvalidArgument("scene has no free voxel for the transmitter");

  std::vector<VoxelCoord> probes;
  for (int p = 0; p < options.los_probes; ++p) {
    probes.push_back({rng.uniform_int(0, spec.L - 1), rng.uniform_int(0, spec.W - 1), rng.uniform_int(0, spec.H - 1)});
  }

  VoxelCoord best = free.front();
  int best_score = -1;
  const int candidates = std::max(1, options.tx_candidates);
  for (int k = 0; k < candidates; ++k) {
    const auto& c = free[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(free.size()) - 1))];
    int score = 0;
    for (const auto& p : probes) score += trace_attenuation(buildings, c, p) == 0.0 ? 1 : 0;
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }

  BsConfig bs;
  bs.p_tx = best;
  const double cl = 0.5 * (spec.L - 1) - best[0];
  const double cw = 0.5 * (spec.W - 1) - best[1];
  bs.azimuth = (cl == 0.0 && cw == 0.0) ? 0.0 : std::atan2(cw, cl);
  bs.elevation = 0.0;
  return bs;
}

Scene generate_scene(std::uint64_t seed, const VoxelGridSpec& spec, int n_buildings, const SceneOptions& options) {
  Scene scene{generate_buildings(derive_seed(seed, 0), spec, n_buildings, options), {}};
  scene.bs = place_transmitter(scene.buildings, derive_seed(seed, 1), options);
  return scene;
}

}  // namespace farm::synth
