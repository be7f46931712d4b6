#include "farm/nn/layers.hpp"

#include <cmath>

namespace farm::nn {

void initialize(Parameter& p, Init init, Rng& rng) {
  switch (init) {
    case Init::Zero:
      p.value.setZero();
      break;
    case Init::Normal002:
      for (Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng.normal(0.0, 0.02);
      break;
    case Init::XavierUniform: {
      const double bound = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
      for (Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng.uniform(-bound, bound);
      break;
    }
  }
}

Linear::Linear(ParameterSet& params, const std::string& name, Index in, Index out, Init init, Rng& rng)
    : weight_(&params.create(name + ".weight", in, out)), bias_(&params.create(name + ".bias", 1, out)) {
  initialize(*weight_, init, rng);
}

Var Linear::operator()(Tape& tape, const Var& x) const {
  return linear(x, tape.parameter(*weight_), tape.parameter(*bias_));
}

LayerNorm::LayerNorm(ParameterSet& params, const std::string& name, Index width)
    : gain_(&params.create(name + ".gain", 1, width)), bias_(&params.create(name + ".bias", 1, width)) {
  gain_->value.setOnes();
}

Var LayerNorm::operator()(Tape& tape, const Var& x) const {
  return add_row(mul_row(layer_norm(x), tape.parameter(*gain_)), tape.parameter(*bias_));
}

FeedForward::FeedForward(ParameterSet& params, const std::string& name, Index width, Index hidden, Rng& rng)
    : up_(params, name + ".fc1", width, hidden, Init::XavierUniform, rng),
      down_(params, name + ".fc2", hidden, width, Init::XavierUniform, rng) {}

Var FeedForward::operator()(Tape& tape, const Var& x) const { return down_(tape, gelu(up_(tape, x))); }

}  // namespace farm::nn
