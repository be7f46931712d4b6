#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "farm/nn/parameters.hpp"
#include "farm/nn/tape.hpp"

namespace farm::testing {

/// Largest relative gap between tape gradients and central differences over
/// every unfrozen parameter entry (at most max_entries per parameter).
inline double gradcheck(nn::ParameterSet& params, const std::function<nn::Var(nn::Tape&)>& loss_fn,
                        double h = 1e-5, int max_entries = 40) {
  params.zero_grad();
  {
    nn::Tape tape;
    tape.backward(loss_fn(tape));
  }
  auto eval = [&] {
    nn::Tape tape(false);
    return loss_fn(tape).value()(0, 0);
  };
  double worst = 0.0;
  for (nn::Parameter* p : params.all()) {
    if (p->frozen) continue;
    const auto n = p->value.size();
    const auto stride = std::max<long>(1, static_cast<long>(n) / max_entries);
    for (long i = 0; i < n; i += stride) {
      double& x = p->value.data()[i];
      const double keep = x;
      x = keep + h;
      const double up = eval();
      x = keep - h;
      const double down = eval();
      x = keep;
      const double fd = (up - down) / (2 * h);
      const double an = p->grad.size() ? p->grad.data()[i] : 0.0;
      worst = std::max(worst, std::abs(fd - an) / std::max(1e-6, std::abs(fd) + std::abs(an)));
    }
  }
  return worst;
}

/// Same comparison on `count` entries drawn uniformly over all unfrozen scalars.
inline double gradcheck_sampled(nn::ParameterSet& params, const std::function<nn::Var(nn::Tape&)>& loss_fn, int count,
                                std::uint64_t seed, double h = 1e-5) {
  params.zero_grad();
  {
    nn::Tape tape;
    tape.backward(loss_fn(tape));
  }
  auto eval = [&] {
    nn::Tape tape(false);
    return loss_fn(tape).value()(0, 0);
  };
  std::vector<std::pair<nn::Parameter*, long>> pool;
  for (nn::Parameter* p : params.all())
    if (!p->frozen)
      for (long i = 0; i < p->value.size(); ++i) pool.emplace_back(p, i);
  std::mt19937_64 gen(seed);
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    auto [p, i] = pool[gen() % pool.size()];
    double& x = p->value.data()[i];
    const double keep = x;
    x = keep + h;
    const double up = eval();
    x = keep - h;
    const double down = eval();
    x = keep;
    const double fd = (up - down) / (2 * h);
    const double an = p->grad.size() ? p->grad.data()[i] : 0.0;
    worst = std::max(worst, std::abs(fd - an) / std::max(1e-6, std::abs(fd) + std::abs(an)));
  }
  return worst;
}

}  // namespace farm::testing
