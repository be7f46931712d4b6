#pragma once

#include <cstdint>

#include "farm/core/grid.hpp"

namespace farm::cond {

/// Upper guard on the flow time: t is drawn from [0, 1 - delta].
inline constexpr double kFlowDelta = 1e-3;

/// Point on the linear probability path Z_t = t R + (1 - t) eps.
struct FlowState {
  double t = 0.0;
  Field epsilon;
  Field z;
  Field velocity;  // R - eps
};

/// Rejects t outside [0, 1 - delta]. Shapes of r_unit and epsilon must match.
FlowState flow_interpolate(const Field& r_unit, const Field& epsilon, double t, double delta = kFlowDelta);

/// Standard normal noise field, deterministic in seed.
Field gaussian_field(const VoxelGridSpec& spec, std::uint64_t seed);

}  // namespace farm::cond
