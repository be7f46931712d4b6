#include "farm/model/encoder.hpp"

#include <cmath>

namespace farm::model {

using nn::Init;
using nn::Matrix;
using nn::Var;

void EncoderConfig::validate() const {
  require(depth >= 0, "encoder depth must be non-negative");
  require(heads >= 1 && width % heads == 0, "encoder width must be divisible by the head count");
  require(mlp_ratio >= 1, "encoder mlp ratio must be >= 1");
  (void)axis_split(width);
}

int patch_features(const PatchShape& patch) { return 4 * patch.voxels(); }

RadioEncoder::RadioEncoder(nn::ParameterSet& params, const EncoderConfig& config, const PatchShape& patch, Rng& rng)
    : config_(config) {
  config_.validate();
  const int d = config.width;
  embed_ = nn::Linear(params, "enc.embed", patch_features(patch), d, Init::XavierUniform, rng);
  for (int b = 0; b < config.depth; ++b) {
    const std::string p = "enc.blocks." + std::to_string(b);
    blocks_.push_back(Block{nn::LayerNorm(params, p + ".norm1", d),
                            nn::Linear(params, p + ".attn.q", d, d, Init::XavierUniform, rng),
                            nn::Linear(params, p + ".attn.k", d, d, Init::XavierUniform, rng),
                            nn::Linear(params, p + ".attn.v", d, d, Init::XavierUniform, rng),
                            nn::Linear(params, p + ".attn.out", d, d, Init::XavierUniform, rng),
                            nn::LayerNorm(params, p + ".norm2", d),
                            nn::FeedForward(params, p + ".mlp", d, d * config.mlp_ratio, rng)});
  }
  final_norm_ = nn::LayerNorm(params, "enc.norm", d);
}

Var RadioEncoder::embed_visible(nn::Tape& tape, const Matrix& patches) const {
  require(patches.cols() == embed_.in_features(), "visible patch width does not match the encoder embedding");
  return embed_(tape, tape.constant(patches));
}

Var RadioEncoder::encode(nn::Tape& tape, const Var& tokens, const std::vector<VoxelCoord>& coords,
                         AttentionTrace* trace) const {
  require(static_cast<std::size_t>(tokens.rows()) == coords.size(), "token and coordinate counts differ");
  const AxisSplit split = config_.split();
  Var x = tokens;
  if (config_.absolute_pe) x = nn::add(x, tape.constant(sincos_pe(coords, split)));
  const RopeTables rope = rope_tables(coords, split);
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(config_.width / config_.heads));

  for (const auto& blk : blocks_) {
    const Var h = blk.norm1(tape, x);
    Var q = blk.q(tape, h);
    Var k = blk.k(tape, h);
    const Var v = blk.v(tape, h);
    if (config_.rope) {
      q = nn::rope(q, rope.cos, rope.sin);
      k = nn::rope(k, rope.cos, rope.sin);
    }
    if (trace) trace->logits.push_back(nn::attention_logits(q.value(), k.value(), config_.heads, attn_scale));
    x = nn::add(x, blk.out(tape, nn::attention(q, k, v, config_.heads, attn_scale)));
    x = nn::add(x, blk.mlp(tape, blk.norm2(tape, x)));
  }
  return final_norm_(tape, x);
}

Var RadioEncoder::forward(nn::Tape& tape, const Matrix& patches, const std::vector<VoxelCoord>& coords,
                          AttentionTrace* trace) const {
  return encode(tape, embed_visible(tape, patches), coords, trace);
}

}  // namespace farm::model
