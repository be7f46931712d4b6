#pragma once

#include <vector>

#include "farm/cond/conditioning.hpp"
#include "farm/model/farm_model.hpp"
#include "farm/synth/propagation.hpp"
#include "farm/synth/scene.hpp"
#include "farm/train/trainer.hpp"

namespace farm::testing {

/// Small model used across training and inference tests: 8x8x4 grid, 4x4x2 patches.
inline model::ModelConfig micro_model() {
  model::ModelConfig c;
  c.encoder = {1, 12, 2, 2, true, true};
  c.decoder.depth = 1;
  c.decoder.width = 12;
  c.decoder.heads = 2;
  c.decoder.mlp_ratio = 2;
  c.patch = {4, 4, 2};
  return c;
}

inline VoxelGridSpec micro_grid() { return {8, 8, 4, 4.0, {0.0, 0.0, 0.0}}; }

inline NormRange micro_norm() { return {-140.0, -20.0}; }

inline std::vector<train::TrainingExample> micro_examples(int n, std::uint64_t seed = 1) {
  std::vector<train::TrainingExample> out;
  for (int i = 0; i < n; ++i) {
    const auto scene = synth::generate_scene(seed + static_cast<std::uint64_t>(i), micro_grid(), 2);
    const auto vol = synth::render_arm(scene.buildings, scene.bs, {}, micro_norm());
    out.push_back({"m" + std::to_string(i), normalize(vol, micro_norm()),
                   cond::build_condition_grids(scene.buildings, scene.bs, micro_norm()),
                   cond::null_condition_grids(micro_grid())});
  }
  return out;
}

}  // namespace farm::testing
