#pragma once

#include <vector>

#include "farm/nn/tensor.hpp"

namespace farm::model {

/// Optional sink for per-block, per-head attention logits.
struct AttentionTrace {
  std::vector<std::vector<nn::Matrix>> logits;
};

}  // namespace farm::model
