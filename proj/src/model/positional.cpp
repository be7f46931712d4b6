#include "farm/model/positional.hpp"

#include <cmath>
#include <string>

#include "farm/core/error.hpp"

namespace farm::model {

AxisSplit axis_split(int width) {
  if (width < 6 || width % 2 != 0) {
    throw InvalidArgument("positional width " + std::to_string(width) + " must be even and at least 6");
  }
  const int lw = 2 * (width / 6);
  return {lw, lw, width - 2 * lw};
}

double axis_phase(int coordinate, int pair, int axis_width) {
  return static_cast<double>(coordinate) / std::pow(10000.0, 2.0 * pair / static_cast<double>(axis_width));
}

namespace {

template <class Fn>
void for_each_pair(const AxisSplit& split, Fn&& fn) {
  const int widths[3] = {split.l, split.w, split.h};
  int column = 0;
  for (int axis = 0; axis < 3; ++axis) {
    for (int j = 0; j < widths[axis] / 2; ++j) {
      fn(axis, j, widths[axis], column);
      column += 2;
    }
  }
}

}  // namespace

nn::Matrix sincos_pe(const std::vector<VoxelCoord>& coords, const AxisSplit& split) {
  nn::Matrix pe(static_cast<nn::Index>(coords.size()), split.total());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for_each_pair(split, [&](int axis, int j, int width, int column) {
      const double kappa = axis_phase(coords[i][static_cast<std::size_t>(axis)], j, width);
      pe(static_cast<nn::Index>(i), column) = std::sin(kappa);
      pe(static_cast<nn::Index>(i), column + 1) = std::cos(kappa);
    });
  }
  return pe;
}

RopeTables rope_tables(const std::vector<VoxelCoord>& coords, const AxisSplit& split) {
  const auto n = static_cast<nn::Index>(coords.size());
  RopeTables t{nn::Matrix(n, split.total() / 2), nn::Matrix(n, split.total() / 2)};
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for_each_pair(split, [&](int axis, int j, int width, int column) {
      const double kappa = axis_phase(coords[i][static_cast<std::size_t>(axis)], j, width);
      t.cos(static_cast<nn::Index>(i), column / 2) = std::cos(kappa);
      t.sin(static_cast<nn::Index>(i), column / 2) = std::sin(kappa);
    });
  }
  return t;
}

nn::Matrix rope_rotate(const nn::Matrix& x, const RopeTables& tables) {
  require(x.cols() % 2 == 0, "rope: feature width must be even");
  require(tables.cos.rows() == x.rows() && tables.cos.cols() * 2 == x.cols(), "rope: table shape mismatch");
  nn::Matrix out(x.rows(), x.cols());
  for (nn::Index i = 0; i < x.rows(); ++i) {
    for (nn::Index j = 0; j < x.cols() / 2; ++j) {
      const double c = tables.cos(i, j), s = tables.sin(i, j);
      out(i, 2 * j) = x(i, 2 * j) * c - x(i, 2 * j + 1) * s;
      out(i, 2 * j + 1) = x(i, 2 * j + 1) * c + x(i, 2 * j) * s;
    }
  }
  return out;
}

}  // namespace farm::model
