#include "farm/cond/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "farm/core/error.hpp"

namespace farm::cond {

std::vector<bool> PatchMask::masked_flags() const {
  std::vector<bool> flags(static_cast<std::size_t>(patch_count()), false);
  for (int id : masked_ids) flags[static_cast<std::size_t>(id)] = true;
  return flags;
}

PatchMask sample_mask(int n_patches, double p_mask, std::uint64_t seed) {
  require(n_patches >= 0, "patch count must be non-negative");
  require(p_mask >= 0.0 && p_mask <= 1.0, "masking ratio must lie in [0, 1]");
  const int n_masked = static_cast<int>(std::floor(p_mask * n_patches));

  std::vector<int> order(static_cast<std::size_t>(n_patches));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 engine(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(engine() % i);
    std::swap(order[i - 1], order[j]);
  }

  PatchMask m;
  m.p_mask = p_mask;
  m.seed = seed;
  m.masked_ids.assign(order.begin(), order.begin() + n_masked);
  m.visible_ids.assign(order.begin() + n_masked, order.end());
  std::sort(m.masked_ids.begin(), m.masked_ids.end());
  std::sort(m.visible_ids.begin(), m.visible_ids.end());
  return m;
}

PatchMask mask_from_visible(int n_patches, const std::vector<int>& visible_ids) {
  std::vector<bool> visible(static_cast<std::size_t>(n_patches), false);
  for (int id : visible_ids) {
    require(id >= 0 && id < n_patches, "visible patch id out of range");
    require(!visible[static_cast<std::size_t>(id)], "duplicate visible patch id");
    visible[static_cast<std::size_t>(id)] = true;
  }
  PatchMask m;
  for (int p = 0; p < n_patches; ++p) (visible[static_cast<std::size_t>(p)] ? m.visible_ids : m.masked_ids).push_back(p);
  m.p_mask = n_patches > 0 ? static_cast<double>(m.masked_ids.size()) / n_patches : 0.0;
  return m;
}

}  // namespace farm::cond
