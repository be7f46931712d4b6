#include "farm/model/decoder.hpp"

#include <cmath>

#include "farm/model/encoder.hpp"

namespace farm::model {

using nn::Init;
using nn::Matrix;
using nn::Var;

void DecoderConfig::validate() const {
  require(depth >= 0, "decoder depth must be non-negative");
  require(heads >= 1 && width % heads == 0, "decoder width must be divisible by the head count");
  require(mlp_ratio >= 1, "decoder mlp ratio must be >= 1");
  require(resolved_time_dim() % 2 == 0, "timestep dimension must be even");
  require(resolved_freq_count() >= 1, "timestep frequency count must be >= 1");
  (void)axis_split(width);
}

std::vector<double> timestep_frequencies(int n) {
  require(n >= 1, "timestep frequency count must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(n), 1.0);
  for (int j = 1; j < n; ++j) w[static_cast<std::size_t>(j)] = std::pow(10.0, 4.0 * j / (n - 1));
  return w;
}

Matrix timestep_features(double t, const std::vector<double>& frequencies) {
  const auto n = static_cast<nn::Index>(frequencies.size());
  Matrix e(1, 2 * n);
  for (nn::Index j = 0; j < n; ++j) {
    e(0, j) = std::cos(t * frequencies[static_cast<std::size_t>(j)]);
    e(0, n + j) = std::sin(t * frequencies[static_cast<std::size_t>(j)]);
  }
  return e;
}

MapDecoder::MapDecoder(nn::ParameterSet& params, const DecoderConfig& config, const PatchShape& patch,
                       int encoder_width, Rng& rng)
    : config_(config), frequencies_(timestep_frequencies(config.resolved_freq_count())) {
  config_.validate();
  const int d = config.width;
  const int td = config.resolved_time_dim();
  embed_ = nn::Linear(params, "dec.embed", patch_features(patch), d, Init::XavierUniform, rng);
  align_ = nn::Linear(params, "dec.align", encoder_width, d, Init::XavierUniform, rng);
  time_fc1_ = nn::Linear(params, "dec.time.fc1", 2 * config.resolved_freq_count(), td, Init::Normal002, rng);
  time_fc2_ = nn::Linear(params, "dec.time.fc2", td, td, Init::Normal002, rng);
  for (int b = 0; b < config.depth; ++b) {
    const std::string p = "dec.blocks." + std::to_string(b);
    blocks_.push_back(Block{nn::Linear(params, p + ".modulation", td, 6 * d, Init::Zero, rng),
                            nn::Linear(params, p + ".attn.q", d, d, Init::XavierUniform, rng),
                            nn::Linear(params, p + ".attn.k", d, d, Init::XavierUniform, rng),
                            nn::Linear(params, p + ".attn.v", d, d, Init::XavierUniform, rng),
                            nn::Linear(params, p + ".attn.out", d, d, Init::XavierUniform, rng),
                            nn::FeedForward(params, p + ".mlp", d, d * config.mlp_ratio, rng)});
  }
  head_ = nn::Linear(params, "dec.head", d, patch.voxels(), Init::XavierUniform, rng);
}

Var MapDecoder::embed_noisy(nn::Tape& tape, const Matrix& patches) const {
  require(patches.cols() == embed_.in_features(), "noisy patch width does not match the decoder embedding");
  return embed_(tape, tape.constant(patches));
}

Var MapDecoder::align_encoder(nn::Tape& tape, const Var& encoder_tokens) const { return align_(tape, encoder_tokens); }

Var MapDecoder::timestep_embed(nn::Tape& tape, double t) const {
  const Var e = tape.constant(timestep_features(t, frequencies_));
  return time_fc2_(tape, nn::silu(time_fc1_(tape, e)));
}

std::vector<Var> MapDecoder::modulation(nn::Tape& tape, int b, const Var& t_dec) const {
  const Var all = blocks_.at(static_cast<std::size_t>(b)).modulation(tape, nn::silu(t_dec));
  std::vector<Var> out;
  for (int i = 0; i < 6; ++i) out.push_back(nn::slice_cols(all, i * config_.width, config_.width));
  return out;
}

Var MapDecoder::normalize(const Var& x) const {
  return config_.norm == DecoderNorm::Rms ? nn::rms_norm(x) : nn::layer_norm(x);
}

Var MapDecoder::block(nn::Tape& tape, int b, const Var& x, const Var& t_dec, const RopeTables& rope,
                      AttentionTrace* trace) const {
  const auto& blk = blocks_.at(static_cast<std::size_t>(b));
  const auto mod = modulation(tape, b, t_dec);  // beta1, gamma1, alpha1, beta2, gamma2, alpha2
  const Var h = nn::modulate(normalize(x), mod[0], mod[1]);
  Var q = blk.q(tape, h);
  Var k = blk.k(tape, h);
  const Var v = blk.v(tape, h);
  if (config_.rope) {
    q = nn::rope(q, rope.cos, rope.sin);
    k = nn::rope(k, rope.cos, rope.sin);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(config_.width));
  if (trace) trace->logits.push_back(nn::attention_logits(q.value(), k.value(), config_.heads, scale));
  const Var attn = blk.out(tape, nn::attention(q, k, v, config_.heads, scale));
  Var y = nn::add(x, nn::mul_row(attn, mod[2]));
  const Var h2 = nn::modulate(normalize(y), mod[3], mod[4]);
  return nn::add(y, nn::mul_row(blk.mlp(tape, h2), mod[5]));
}

Var MapDecoder::blocks(nn::Tape& tape, const Var& x, double t, const std::vector<VoxelCoord>& coords,
                       AttentionTrace* trace) const {
  require(static_cast<std::size_t>(x.rows()) == coords.size(), "token and coordinate counts differ");
  if (blocks_.empty()) return x;
  const Var t_dec = timestep_embed(tape, t);
  const RopeTables rope = rope_tables(coords, config_.split());
  Var y = x;
  for (int b = 0; b < config_.depth; ++b) y = block(tape, b, y, t_dec, rope, trace);
  return y;
}

Var MapDecoder::decode(nn::Tape& tape, const Var& full_tokens, double t, const std::vector<VoxelCoord>& coords,
                       AttentionTrace* trace) const {
  require(static_cast<std::size_t>(full_tokens.rows()) == coords.size(), "token and coordinate counts differ");
  Var x = full_tokens;
  if (config_.absolute_pe) x = nn::add(x, tape.constant(sincos_pe(coords, config_.split())));
  return head_(tape, blocks(tape, x, t, coords, trace));
}

}  // namespace farm::model
