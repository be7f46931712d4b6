#pragma once

#include <vector>

#include "farm/core/grid.hpp"
#include "farm/nn/tensor.hpp"

namespace farm::model {

/// Feature widths assigned to the l, w and h axes; each is even.
struct AxisSplit {
  int l = 0;
  int w = 0;
  int h = 0;

  int total() const { return l + w + h; }
};

/// D_l = D_w = 2 floor(D / 6), D_h = D - 2 D_l. Rejects odd widths.
AxisSplit axis_split(int width);

/// Phase kappa = p / 10000^(2j / D_k) for coordinate p, pair index j, axis width D_k.
double axis_phase(int coordinate, int pair, int axis_width);

/// Absolute 3D sin/cos encoding: per axis, column 2j = sin(kappa_j), 2j+1 = cos(kappa_j);
/// blocks concatenated l, w, h.
nn::Matrix sincos_pe(const std::vector<VoxelCoord>& coords, const AxisSplit& split);

/// Per-pair rotation phases in the same l, w, h layout (N x D/2).
struct RopeTables {
  nn::Matrix cos;
  nn::Matrix sin;
};
RopeTables rope_tables(const std::vector<VoxelCoord>& coords, const AxisSplit& split);

/// x * cos(kappa) + rot(x) * sin(kappa) with rot([x0, x1, ...]) = [-x1, x0, ...].
nn::Matrix rope_rotate(const nn::Matrix& x, const RopeTables& tables);

}  // namespace farm::model
