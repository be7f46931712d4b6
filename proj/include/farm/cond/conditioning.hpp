#pragma once

#include <array>

#include "farm/cond/flow.hpp"
#include "farm/cond/mask.hpp"
#include "farm/core/grid.hpp"
#include "farm/core/patch.hpp"
#include "farm/core/types.hpp"
#include "farm/synth/propagation.hpp"

namespace farm::cond {

/// Value written into every condition channel when conditions are missing.
inline constexpr double kMissingCondition = -2.0;

enum Channel : int { kRadio = 0, kPosition = 1, kFreeSpace = 2, kBuildings = 3 };
inline constexpr int kChannels = 4;

struct ConditionGrids {
  Field position;   // one-hot at the transmitter
  Field free_space; // normalized P_tx - (fspl - g), the unobstructed RSS
  Field buildings;  // occupancy
  Field free_space_loss_db;  // raw fspl - g; empty when dropped
  bool dropped = false;
};

/// With drop set, all three channels hold kMissingCondition.
ConditionGrids build_condition_grids(const BuildingGrid& buildings, const BsConfig& bs, const NormRange& norm,
                                     bool drop = false,
                                     double fspl_constant_db = synth::kFreeSpaceConstantDb);

ConditionGrids null_condition_grids(const VoxelGridSpec& spec);

/// Four-channel voxel tensor (radio, V_pos, V_fspl, B) and its patch plan.
struct ConditionedInput {
  std::array<Field, kChannels> channels;
  PatchMask mask;
  double t = 0.0;
};

/// Radio channel: clean R on visible patches, Z_t on masked patches.
ConditionedInput assemble_input(const Field& r_unit, const ConditionGrids& grids, const PatchMask& mask,
                                const PatchPlan& plan, double t, const Field& epsilon);

/// Same layout with an explicit radio channel (used by the sampler).
ConditionedInput compose_input(Field radio, const ConditionGrids& grids, const PatchMask& mask, double t);

}  // namespace farm::cond
