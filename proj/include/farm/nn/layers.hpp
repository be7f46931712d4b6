#pragma once

#include <string>

#include "farm/core/rng.hpp"
#include "farm/nn/ops.hpp"
#include "farm/nn/parameters.hpp"

namespace farm::nn {

enum class Init { XavierUniform, Normal002, Zero };

class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet& params, const std::string& name, Index in, Index out, Init init, Rng& rng);

  Var operator()(Tape& tape, const Var& x) const;
  Index in_features() const { return weight_->value.rows(); }
  Index out_features() const { return weight_->value.cols(); }
  Parameter& weight() const { return *weight_; }
  Parameter& bias() const { return *bias_; }

 private:
  Parameter* weight_ = nullptr;
  Parameter* bias_ = nullptr;
};

/// Mean-subtracting layer norm with learnable gain and bias.
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterSet& params, const std::string& name, Index width);
  Var operator()(Tape& tape, const Var& x) const;

 private:
  Parameter* gain_ = nullptr;
  Parameter* bias_ = nullptr;
};

/// Two-layer GELU feed-forward network.
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParameterSet& params, const std::string& name, Index width, Index hidden, Rng& rng);
  Var operator()(Tape& tape, const Var& x) const;

 private:
  Linear up_;
  Linear down_;
};

void initialize(Parameter& p, Init init, Rng& rng);

}  // namespace farm::nn
