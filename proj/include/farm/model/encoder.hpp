#pragma once

#include <vector>

#include "farm/core/patch.hpp"
#include "farm/model/attention_trace.hpp"
#include "farm/model/positional.hpp"
#include "farm/nn/layers.hpp"

namespace farm::model {

struct EncoderConfig {
  int depth = 4;
  int width = 128;
  int heads = 8;
  int mlp_ratio = 4;
  bool absolute_pe = true;
  bool rope = true;

  void validate() const;
  AxisSplit split() const { return axis_split(width); }
};

/// Flattened width of a four-channel patch.
int patch_features(const PatchShape& patch);

/// Pre-norm ViT over visible tokens with SinCos input encoding and RoPE attention.
class RadioEncoder {
 public:
  RadioEncoder(nn::ParameterSet& params, const EncoderConfig& config, const PatchShape& patch, Rng& rng);

  /// E-MLP: (N_v, 4 l_p w_p h_p) -> (N_v, D_enc).
  nn::Var embed_visible(nn::Tape& tape, const nn::Matrix& patches) const;
  /// Adds the absolute encoding, runs the blocks and the final norm.
  nn::Var encode(nn::Tape& tape, const nn::Var& tokens, const std::vector<VoxelCoord>& coords,
                 AttentionTrace* trace = nullptr) const;
  nn::Var forward(nn::Tape& tape, const nn::Matrix& patches, const std::vector<VoxelCoord>& coords,
                  AttentionTrace* trace = nullptr) const;

  const EncoderConfig& config() const { return config_; }

 private:
  struct Block {
    nn::LayerNorm norm1;
    nn::Linear q, k, v, out;
    nn::LayerNorm norm2;
    nn::FeedForward mlp;
  };

  EncoderConfig config_;
  nn::Linear embed_;
  std::vector<Block> blocks_;
  nn::LayerNorm final_norm_;
};

}  // namespace farm::model
