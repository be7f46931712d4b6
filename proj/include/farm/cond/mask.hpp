#pragma once

#include <cstdint>
#include <vector>

namespace farm::cond {

/// Disjoint masked / visible patch index lists, each sorted ascending.
struct PatchMask {
  std::vector<int> masked_ids;
  std::vector<int> visible_ids;
  double p_mask = 0.0;
  std::uint64_t seed = 0;

  int patch_count() const { return static_cast<int>(masked_ids.size() + visible_ids.size()); }
  /// One flag per patch, true where masked.
  std::vector<bool> masked_flags() const;
};

/// floor(p_mask * N_p) patches chosen uniformly at random, deterministic in seed.
PatchMask sample_mask(int n_patches, double p_mask, std::uint64_t seed);

/// Mask whose visible set is given explicitly; every other patch is masked.
PatchMask mask_from_visible(int n_patches, const std::vector<int>& visible_ids);

}  // namespace farm::cond
