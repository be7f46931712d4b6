#include "farm/infer/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "farm/core/error.hpp"

namespace farm::infer {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::ConditionFree: return "condition_free";
    case Mode::ConditionOnly: return "condition_only";
    case Mode::Hybrid: return "hybrid";
  }
  return "unknown";
}

Mode parse_mode(const std::string& text) {
  if (text == "free" || text == "condition_free") return Mode::ConditionFree;
  if (text == "cond" || text == "condition_only") return Mode::ConditionOnly;
  if (text == "hybrid") return Mode::Hybrid;
  throw ConfigError("unknown inference mode '" + text + "' (expected free, cond or hybrid)");
}

void InferenceRequest::validate(const VoxelGridSpec& spec) const {
  require(steps >= 1, "inference steps K must be >= 1");
  const bool has_obs = observations.has_value();
  const bool has_grids = grids.has_value() && !grids->dropped;
  switch (mode) {
    case Mode::ConditionFree:
      require(has_obs, "condition_free mode requires observations");
      require(!has_grids, "condition_free mode forbids condition grids");
      break;
    case Mode::ConditionOnly:
      require(has_grids, "condition_only mode requires condition grids");
      require(!has_obs, "condition_only mode takes no observations");
      break;
    case Mode::Hybrid:
      require(has_obs && has_grids, "hybrid mode requires both observations and condition grids");
      break;
  }
  if (has_obs) {
    observations->validate(spec);
    require(observations->size() > 0, "observation set is empty");
  }
  if (has_grids) {
    require(grids->position.spec() == spec && grids->free_space.spec() == spec && grids->buildings.spec() == spec,
            "condition grids do not match the grid spec");
  }
}

Field velocity(const Field& pred, const Field& z, double t, const cond::PatchMask& mask, const PatchPlan& plan,
               double delta) {
  require(t >= 0.0 && t <= 1.0 - delta, "velocity: t outside [0, 1 - delta]");
  require(pred.spec() == z.spec() && pred.spec() == plan.spec(), "velocity: shape mismatch");
  Field v(plan.spec(), 0.0);
  const double inv = 1.0 / (1.0 - t);
  for (int p : mask.masked_ids) {
    for (auto i : plan.voxel_indices(p)) v[i] = (pred[i] - z[i]) * inv;
  }
  return v;
}

ObservedPatches observed_patches(const SparseObservation& obs, const PatchPlan& plan, const NormRange& norm) {
  const auto& spec = plan.spec();
  obs.validate(spec);
  ObservedPatches out{{}, Field(spec, 0.0), std::vector<bool>(spec.voxel_count(), false)};
  std::vector<double> sum(static_cast<std::size_t>(plan.count()), 0.0);
  std::vector<int> count(static_cast<std::size_t>(plan.count()), 0);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const std::size_t i = obs.indices[k];
    const double v = norm.normalize(obs.values[k]);
    out.radio[i] = v;
    out.observed[i] = true;
    const auto p = static_cast<std::size_t>(plan.patch_of(spec.coord(i)));
    sum[p] += v;
    ++count[p];
  }
  for (int p = 0; p < plan.count(); ++p) {
    const auto pi = static_cast<std::size_t>(p);
    if (count[pi] == 0) continue;
    out.visible_ids.push_back(p);
    const double mean = sum[pi] / count[pi];
    for (auto i : plan.voxel_indices(p)) {
      if (!out.observed[i]) out.radio[i] = mean;
    }
  }
  return out;
}

SampleResult sample(const Denoiser& denoiser, const InferenceRequest& request, const PatchPlan& plan,
                    const NormRange& norm, double delta) {
  const auto& spec = plan.spec();
  request.validate(spec);
  norm.validate();

  std::optional<ObservedPatches> seen;
  if (request.mode != Mode::ConditionOnly) seen = observed_patches(*request.observations, plan, norm);
  const cond::PatchMask mask =
      cond::mask_from_visible(plan.count(), seen ? seen->visible_ids : std::vector<int>{});
  const cond::ConditionGrids grids =
      request.mode == Mode::ConditionFree ? cond::null_condition_grids(spec) : *request.grids;

  // Z_0 is standard noise on the masked patches; visible patches hold observations.
  const Field noise = cond::gaussian_field(spec, request.seed);
  Field z = seen ? seen->radio : Field(spec, 0.0);
  for (int p : mask.masked_ids) {
    for (auto i : plan.voxel_indices(p)) z[i] = noise[i];
  }

  const int k_steps = request.steps;
  Field pred;
  for (int k = 0; k < k_steps; ++k) {
    const double t = static_cast<double>(k) / k_steps;
    pred = denoiser.predict_clean(cond::compose_input(z, grids, mask, t), plan);
    require(pred.spec() == spec, "denoiser output does not match the grid");
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (!std::isfinite(pred[i])) throw NumericalError("sampler: non-finite prediction at step " + std::to_string(k));
    }
    if (k + 1 == k_steps) break;
    const double t_next = std::min(static_cast<double>(k + 1) / k_steps, 1.0 - delta);
    const Field v = velocity(pred, z, t, mask, plan, delta);
    for (int p : mask.masked_ids) {
      for (auto i : plan.voxel_indices(p)) z[i] += (t_next - t) * v[i];
    }
  }

  SampleResult out{ArmVolume{Field(spec), norm}, pred, {}};
  for (std::size_t i = 0; i < pred.size(); ++i) out.volume.values[i] = norm.denormalize(pred[i]);
  if (seen) {
    const auto& obs = *request.observations;
    for (std::size_t k = 0; k < obs.size(); ++k) {
      out.volume.values[obs.indices[k]] = obs.values[k];
      out.r_unit[obs.indices[k]] = norm.normalize(obs.values[k]);
    }
  }
  out.metadata = {{"mode", to_string(request.mode)},
                  {"steps", k_steps},
                  {"seed", request.seed},
                  {"visible_patches", mask.visible_ids.size()},
                  {"masked_patches", mask.masked_ids.size()},
                  {"observations", seen ? request.observations->size() : 0}};
  return out;
}

SampleResult estimate_arm(const Denoiser& denoiser, const PatchPlan& plan, const NormRange& norm,
                          std::optional<cond::ConditionGrids> grids, std::optional<SparseObservation> observations,
                          int steps, std::uint64_t seed) {
  if (grids && grids->dropped) grids.reset();
  require(grids.has_value() || observations.has_value(),
          "estimate_arm needs condition grids, observations, or both");
  InferenceRequest req;
  req.mode = grids && observations ? Mode::Hybrid : grids ? Mode::ConditionOnly : Mode::ConditionFree;
  req.steps = steps;
  req.seed = seed;
  req.grids = std::move(grids);
  req.observations = std::move(observations);
  return sample(denoiser, req, plan, norm);
}

SparseObservation sample_observations(const ArmVolume& truth, const PatchPlan& plan, double sample_rate,
                                      std::uint64_t seed) {
  require(sample_rate > 0.0 && sample_rate <= 1.0, "sample rate must lie in (0, 1]");
  require(truth.spec() == plan.spec(), "volume does not match the patch plan");
  const auto mask = cond::sample_mask(plan.count(), 1.0 - sample_rate, seed);
  SparseObservation obs;
  for (int p : mask.visible_ids) {
    for (auto i : plan.voxel_indices(p)) {
      obs.indices.push_back(i);
      obs.values.push_back(truth.values[i]);
    }
  }
  std::sort(obs.indices.begin(), obs.indices.end());
  for (std::size_t k = 0; k < obs.size(); ++k) obs.values[k] = truth.values[obs.indices[k]];
  obs.sample_rate = static_cast<double>(obs.size()) / static_cast<double>(truth.values.size());
  return obs;
}

}  // namespace farm::infer
