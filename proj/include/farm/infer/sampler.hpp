#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "farm/cond/conditioning.hpp"
#include "farm/core/types.hpp"
#include "farm/model/farm_model.hpp"

namespace farm::infer {

enum class Mode { ConditionFree, ConditionOnly, Hybrid };
std::string to_string(Mode mode);
/// Accepts free | cond | hybrid and the long names.
Mode parse_mode(const std::string& text);

struct InferenceRequest {
  Mode mode = Mode::ConditionOnly;
  int steps = 1;
  std::uint64_t seed = 0;
  std::optional<SparseObservation> observations;
  std::optional<cond::ConditionGrids> grids;

  /// Throws InvalidArgument naming the violated mode constraint.
  void validate(const VoxelGridSpec& spec) const;
};

/// Anything that maps a conditioned input to a clean normalized volume.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Field predict_clean(const cond::ConditionedInput& input, const PatchPlan& plan) const = 0;
};

class FarmDenoiser : public Denoiser {
 public:
  explicit FarmDenoiser(const model::FarmModel& model) : model_(model) {}
  Field predict_clean(const cond::ConditionedInput& input, const PatchPlan& plan) const override {
    return model_.predict(input, plan);
  }

 private:
  const model::FarmModel& model_;
};

/// v = (pred - z) / (1 - t) on the masked patches, zero elsewhere.
Field velocity(const Field& pred, const Field& z, double t, const cond::PatchMask& mask, const PatchPlan& plan,
               double delta = cond::kFlowDelta);

/// Visible patches of an observation set and the normalized radio channel on them:
/// observed voxels keep their value, the rest of a visible patch gets the patch mean.
struct ObservedPatches {
  std::vector<int> visible_ids;
  Field radio;                // normalized; meaningful on visible patches only
  std::vector<bool> observed; // per voxel
};
ObservedPatches observed_patches(const SparseObservation& obs, const PatchPlan& plan, const NormRange& norm);

struct SampleResult {
  ArmVolume volume;           // dBm
  Field r_unit;               // normalized estimate
  nlohmann::json metadata;
};

/// Euler integration on t_k = k / K from Z_0 = noise on the masked patches; returns the
/// clean prediction of the last evaluation, with observed voxels passed through.
SampleResult sample(const Denoiser& denoiser, const InferenceRequest& request, const PatchPlan& plan,
                    const NormRange& norm, double delta = cond::kFlowDelta);

/// Chooses the mode from the inputs that are present.
SampleResult estimate_arm(const Denoiser& denoiser, const PatchPlan& plan, const NormRange& norm,
                          std::optional<cond::ConditionGrids> grids, std::optional<SparseObservation> observations,
                          int steps = 1, std::uint64_t seed = 0);

/// Whole-patch observations covering N_p - floor((1 - rate) N_p) random patches.
SparseObservation sample_observations(const ArmVolume& truth, const PatchPlan& plan, double sample_rate,
                                      std::uint64_t seed);

}  // namespace farm::infer
