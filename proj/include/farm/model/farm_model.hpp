#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "farm/cond/conditioning.hpp"
#include "farm/core/patch.hpp"
#include "farm/model/decoder.hpp"
#include "farm/model/encoder.hpp"

namespace farm::model {

/// Patch size used for 32-voxel-wide tiles on large grids.
inline constexpr PatchShape kWidePatch{32, 32, 2};

struct ModelConfig {
  EncoderConfig encoder;
  DecoderConfig decoder;
  PatchShape patch{16, 16, 2};

  void validate() const;
  /// tiny | small | base | large.
  static ModelConfig profile(const std::string& name);
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Rows of flattened four-channel patches (channel-major, then l, w, h) for ids.
nn::Matrix patch_rows(const cond::ConditionedInput& input, const PatchPlan& plan, const std::vector<int>& ids);
/// Single-channel (N_p, l_p w_p h_p) view of a volume in patch order.
nn::Matrix field_patches(const Field& field, const PatchPlan& plan);
/// Writes an (N_p, l_p w_p h_p) prediction back into a volume.
Field unpatchify(const nn::Matrix& patches, const PatchPlan& plan);

/// Encoder and decoder sharing one parameter set ("enc." / "dec." prefixes).
class FarmModel {
 public:
  FarmModel(const ModelConfig& config, std::uint64_t seed);

  FarmModel(const FarmModel&) = delete;
  FarmModel& operator=(const FarmModel&) = delete;

  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  const ModelConfig& config() const { return config_; }
  const RadioEncoder& encoder() const { return encoder_; }
  const MapDecoder& decoder() const { return decoder_; }

  /// Encoder output on the visible patches, or an invalid Var when none are visible.
  nn::Var encode(nn::Tape& tape, const cond::ConditionedInput& input, const PatchPlan& plan) const;
  /// Full-sequence decoder prediction (N_p, l_p w_p h_p) in patch order.
  nn::Var decode(nn::Tape& tape, const nn::Var& encoded, const cond::ConditionedInput& input,
                 const PatchPlan& plan) const;
  nn::Var forward(nn::Tape& tape, const cond::ConditionedInput& input, const PatchPlan& plan) const;

  /// Inference without gradient tracking; returns the normalized clean volume.
  Field predict(const cond::ConditionedInput& input, const PatchPlan& plan) const;

 private:
  ModelConfig config_;
  nn::ParameterSet params_;
  Rng init_rng_;
  RadioEncoder encoder_;
  MapDecoder decoder_;
};

}  // namespace farm::model
