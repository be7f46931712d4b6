#include "farm/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace farm::nn {

void AdamW::step(const std::vector<Parameter*>& params, double lr) {
  ++steps_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
  for (Parameter* p : params) {
    if (p->frozen) continue;
    auto [it, inserted] = state_.try_emplace(p);
    Moments& s = it->second;
    if (inserted) {
      s.m = Matrix::Zero(p->value.rows(), p->value.cols());
      s.v = Matrix::Zero(p->value.rows(), p->value.cols());
    }
    s.m = options_.beta1 * s.m + (1.0 - options_.beta1) * p->grad;
    s.v = options_.beta2 * s.v + (1.0 - options_.beta2) * p->grad.cwiseAbs2();
    const bool decay = p->value.rows() > 1 && p->value.cols() > 1;
    if (decay) p->value *= 1.0 - lr * options_.weight_decay;
    p->value.array() -= lr * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + options_.eps);
  }
}

double warmup_cosine_lr(long step, long warmup_steps, long total_steps, double peak) {
  if (warmup_steps > 0 && step < warmup_steps) {
    return peak * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  }
  const long span = std::max(1L, total_steps - warmup_steps);
  const double progress = std::clamp(static_cast<double>(step - warmup_steps) / static_cast<double>(span), 0.0, 1.0);
  return 0.5 * peak * (1.0 + std::cos(std::numbers::pi * progress));
}

double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm) {
  double total = 0.0;
  for (const Parameter* p : params) {
    if (!p->frozen) total += p->grad.squaredNorm();
  }
  const double norm = std::sqrt(total);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / (norm + 1e-12);
    for (Parameter* p : params) {
      if (!p->frozen) p->grad *= s;
    }
  }
  return norm;
}

}  // namespace farm::nn
