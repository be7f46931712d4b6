#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "farm/model/farm_model.hpp"
#include "farm/synth/dataset.hpp"
#include "farm/train/trainer.hpp"

namespace farm::app {

/// Version string embedded into emitted artifacts.
std::string version();

inline const std::vector<std::string> kStageOrder{"gen", "pretrain", "finetune", "infer", "baseline", "eval",
                                                  "report"};

struct InferenceConfig {
  std::vector<std::string> modes{"cond", "free", "hybrid"};
  int steps = 1;
  double sample_rate = 0.05;
  std::string split = "test";
  std::string subset;          // empty means all subsets
  std::uint64_t seed = 0;
  std::size_t max_samples = 0; // 0 means all
};

struct BaselineConfig {
  bool kriging = true;
  std::size_t max_neighbors = 2000;
  int bins = 15;
};

struct RunConfig {
  std::string name = "run";
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;  // empty: chosen by the caller
  std::filesystem::path data_dir;    // existing dataset; empty means generate under output_dir
  std::vector<std::string> stages = kStageOrder;
  synth::DatasetConfig dataset;
  model::ModelConfig model = model::ModelConfig::profile("tiny");
  train::TrainConfig pretrain = train::TrainConfig::pretrain_defaults();
  train::TrainConfig finetune = train::TrainConfig::finetune_defaults();
  InferenceConfig inference;
  BaselineConfig baseline;
  int threads = 0;
  nlohmann::json source;  // the document this config was parsed from

  bool has_stage(const std::string& stage) const;
  /// Hash over the canonical JSON form.
  std::string hash() const;
};

/// Strict parse: unknown keys and out-of-range values raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

nlohmann::json to_json(const InferenceConfig& c);

/// Common provenance block attached to emitted artifacts.
nlohmann::json provenance(const std::string& config_hash, std::uint64_t seed);

}  // namespace farm::app
