#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "farm/app/config.hpp"
#include "farm/eval/metrics.hpp"
#include "farm/infer/sampler.hpp"

namespace farm::app {

namespace fs = std::filesystem;

/// Dataset directory from a flag, falling back to $FARM_DATA_DIR.
fs::path resolve_data_dir(const std::string& flag);

/// Sidecar metadata path of a volume file (<stem>.json next to <stem>.f32).
fs::path sidecar_path(const fs::path& volume);

/// Writes a dBm volume and its sidecar (grid, norm, metadata).
void write_volume(const fs::path& path, const ArmVolume& volume, const nlohmann::json& metadata);
/// Reads a volume; the grid comes from the sidecar or, failing that, from fallback_grid.
ArmVolume read_volume(const fs::path& path, const std::optional<VoxelGridSpec>& fallback_grid = std::nullopt);

nlohmann::json cmd_gen(const synth::DatasetConfig& config, const fs::path& out, std::uint64_t seed, int jobs);

struct TrainOptions {
  fs::path data;
  fs::path out;
  std::optional<fs::path> init;  // checkpoint to start from (required for fine-tuning)
  model::ModelConfig model;
  train::TrainConfig train;
  fs::path log;                  // NDJSON step log; empty means <out>/train_log.ndjson
  std::string split = "train";
  std::string config_hash;
  std::ostream* progress = nullptr;
};
/// Pretrains a fresh model or fine-tunes a loaded one and saves the checkpoint.
nlohmann::json cmd_train(const TrainOptions& options);

struct InferOptions {
  fs::path ckpt;
  fs::path data;
  fs::path out;
  infer::Mode mode = infer::Mode::ConditionOnly;
  InferenceConfig inference;
  std::vector<std::string> sample_ids;  // empty: the configured split
  std::string config_hash;
};
nlohmann::json cmd_infer(const InferOptions& options);

/// Observation set shared by condition-free inference and the Kriging baseline.
SparseObservation observations_for(const synth::DatasetSample& sample, const PatchPlan& plan,
                                   const InferenceConfig& inference);

struct KrigingOptionsCli {
  fs::path data;
  fs::path out;
  InferenceConfig inference;
  BaselineConfig baseline;
  model::ModelConfig model;  // only the patch size is used, to match observation sampling
  std::string config_hash;
  int threads = 0;
};
nlohmann::json cmd_baseline_kriging(const KrigingOptionsCli& options);

/// Compares every <id>.f32 under pred_dir with the dataset volume of the same id.
nlohmann::json cmd_eval_dir(const fs::path& pred_dir, const fs::path& data, const fs::path& out,
                            const std::string& label, const std::string& config_hash);
/// Single pair of volume files; r defaults to the sidecar normalization span.
eval::MetricsReport cmd_eval_files(const fs::path& pred, const fs::path& truth, std::optional<double> r,
                                   const fs::path& out);

}  // namespace farm::app
