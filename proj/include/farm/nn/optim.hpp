#pragma once

#include <unordered_map>
#include <vector>

#include "farm/nn/parameters.hpp"

namespace farm::nn {

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
};

/// Adaptive moments with decoupled weight decay. Decay applies to 2D weight
/// matrices only; biases and normalization gains are not decayed.
class AdamW {
 public:
  explicit AdamW(AdamWOptions options = {}) : options_(options) {}

  void step(const std::vector<Parameter*>& params, double lr);
  long steps() const { return steps_; }

 private:
  struct Moments {
    Matrix m;
    Matrix v;
  };
  AdamWOptions options_;
  std::unordered_map<const Parameter*, Moments> state_;
  long steps_ = 0;
};

/// Linear warmup to peak, then cosine decay to zero at total_steps.
double warmup_cosine_lr(long step, long warmup_steps, long total_steps, double peak);

/// Rescales gradients so their global L2 norm is at most max_norm; returns the pre-clip norm.
double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm);

}  // namespace farm::nn
