#pragma once

#include <vector>

#include "farm/cond/flow.hpp"
#include "farm/nn/tape.hpp"

namespace farm::train {

/// Mean over rows of ||(pred - z) / (1 - t) - (r - eps)||^2. All matrices are
/// (N_m, patch voxels) and already restricted to the masked patches.
double velocity_loss(const nn::Matrix& pred, const nn::Matrix& r, const nn::Matrix& z, const nn::Matrix& eps,
                     double t, double delta = cond::kFlowDelta);

/// Tape version over a full (N_p, patch voxels) prediction; only rows in masked_ids
/// contribute. Returns a 1x1 node (zero when nothing is masked).
nn::Var velocity_loss(const nn::Var& pred, const nn::Matrix& r, const nn::Matrix& z, const nn::Matrix& eps,
                      double t, const std::vector<int>& masked_ids, double delta = cond::kFlowDelta);

}  // namespace farm::train
