#include "farm/cond/conditioning.hpp"

namespace farm::cond {

ConditionGrids null_condition_grids(const VoxelGridSpec& spec) {
  return {Field(spec, kMissingCondition), Field(spec, kMissingCondition), Field(spec, kMissingCondition), Field(),
          true};
}

ConditionGrids build_condition_grids(const BuildingGrid& buildings, const BsConfig& bs, const NormRange& norm,
                                     bool drop, double fspl_constant_db) {
  const auto& spec = buildings.spec();
  bs.validate(spec);
  norm.validate();
  if (drop) return null_condition_grids(spec);

  ConditionGrids g{Field(spec, 0.0), Field(spec), Field(spec), synth::free_space_loss_db(spec, bs, fspl_constant_db),
                   false};
  g.position(bs.p_tx[0], bs.p_tx[1], bs.p_tx[2]) = 1.0;
  for (std::size_t i = 0; i < g.free_space.size(); ++i) {
    g.free_space[i] = norm.normalize(bs.tx_power_dbm - g.free_space_loss_db[i]);
    g.buildings[i] = buildings.occupancy[i] != 0 ? 1.0 : 0.0;
  }
  return g;
}

ConditionedInput compose_input(Field radio, const ConditionGrids& grids, const PatchMask& mask, double t) {
  require(grids.position.spec() == radio.spec() && grids.free_space.spec() == radio.spec() &&
              grids.buildings.spec() == radio.spec(),
          "condition grids do not match the radio channel shape");
  return {{std::move(radio), grids.position, grids.free_space, grids.buildings}, mask, t};
}

ConditionedInput assemble_input(const Field& r_unit, const ConditionGrids& grids, const PatchMask& mask,
                                const PatchPlan& plan, double t, const Field& epsilon) {
  require(plan.spec() == r_unit.spec(), "patch plan does not match the volume");
  require(mask.patch_count() == plan.count(), "mask does not cover the patch plan");
  const FlowState flow = flow_interpolate(r_unit, epsilon, t);
  Field radio = r_unit;
  for (int p : mask.masked_ids) {
    for (auto i : plan.voxel_indices(p)) radio[i] = flow.z[i];
  }
  return compose_input(std::move(radio), grids, mask, t);
}

}  // namespace farm::cond
