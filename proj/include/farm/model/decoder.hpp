#pragma once

#include <vector>

#include "farm/core/patch.hpp"
#include "farm/model/attention_trace.hpp"
#include "farm/model/positional.hpp"
#include "farm/nn/layers.hpp"

namespace farm::model {

enum class DecoderNorm { Rms, Layer };

struct DecoderConfig {
  int depth = 3;
  int width = 128;
  int heads = 8;
  int mlp_ratio = 4;
  int time_dim = 0;    // 0 means width
  int freq_count = 0;  // 0 means time_dim / 2
  DecoderNorm norm = DecoderNorm::Rms;
  bool absolute_pe = true;
  bool rope = true;

  void validate() const;
  int resolved_time_dim() const { return time_dim > 0 ? time_dim : width; }
  int resolved_freq_count() const { return freq_count > 0 ? freq_count : resolved_time_dim() / 2; }
  AxisSplit split() const { return axis_split(width); }
};

/// Geometric series of n frequencies from 1 to 1e4.
std::vector<double> timestep_frequencies(int n);
/// e_t = [cos(t w), sin(t w)] as a 1 x 2n row.
nn::Matrix timestep_features(double t, const std::vector<double>& frequencies);

/// DiT-style decoder: AdaLN-Zero modulated RMS-normalized blocks with RoPE attention
/// and a linear head back to patch voxels (radio channel only).
class MapDecoder {
 public:
  MapDecoder(nn::ParameterSet& params, const DecoderConfig& config, const PatchShape& patch, int encoder_width,
             Rng& rng);

  /// D-MLP: (N_m, 4 l_p w_p h_p) -> (N_m, D_dec).
  nn::Var embed_noisy(nn::Tape& tape, const nn::Matrix& patches) const;
  /// Affine D_enc -> D_dec.
  nn::Var align_encoder(nn::Tape& tape, const nn::Var& encoder_tokens) const;
  /// t_dec = FFN(SiLU(FFN(e_t))).
  nn::Var timestep_embed(nn::Tape& tape, double t) const;
  /// Six 1 x D rows [beta1, gamma1, alpha1, beta2, gamma2, alpha2] for block b.
  std::vector<nn::Var> modulation(nn::Tape& tape, int b, const nn::Var& t_dec) const;
  nn::Var block(nn::Tape& tape, int b, const nn::Var& x, const nn::Var& t_dec, const RopeTables& rope,
                AttentionTrace* trace = nullptr) const;
  /// Runs the block stack on tokens that already carry P_dec.
  nn::Var blocks(nn::Tape& tape, const nn::Var& x, double t, const std::vector<VoxelCoord>& coords,
                 AttentionTrace* trace = nullptr) const;
  /// Adds P_dec, runs the blocks and the head: (N, D_dec) -> (N, l_p w_p h_p).
  nn::Var decode(nn::Tape& tape, const nn::Var& full_tokens, double t, const std::vector<VoxelCoord>& coords,
                 AttentionTrace* trace = nullptr) const;
  nn::Var head(nn::Tape& tape, const nn::Var& x) const { return head_(tape, x); }

  const DecoderConfig& config() const { return config_; }
  const std::vector<double>& frequencies() const { return frequencies_; }

 private:
  struct Block {
    nn::Linear modulation;
    nn::Linear q, k, v, out;
    nn::FeedForward mlp;
  };
  nn::Var normalize(const nn::Var& x) const;

  DecoderConfig config_;
  std::vector<double> frequencies_;
  nn::Linear embed_;
  nn::Linear align_;
  nn::Linear time_fc1_;
  nn::Linear time_fc2_;
  std::vector<Block> blocks_;
  nn::Linear head_;
};

}  // namespace farm::model
