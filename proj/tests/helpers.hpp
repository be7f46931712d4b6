#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "farm/core/grid.hpp"

namespace farm::testing {

inline Field random_field(const VoxelGridSpec& spec, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Field f(spec);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = u(gen);
  return f;
}

inline VoxelGridSpec grid(int l, int w, int h, double delta = 4.0) { return {l, w, h, delta, {0.0, 0.0, 0.0}}; }

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("farm_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)}); }

}  // namespace farm::testing
