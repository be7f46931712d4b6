#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "farm/cond/conditioning.hpp"
#include "farm/model/farm_model.hpp"
#include "farm/nn/optim.hpp"
#include "farm/synth/dataset.hpp"

namespace farm::train {

enum class Stage { Pretrain, Finetune };
std::string to_string(Stage stage);
Stage parse_stage(const std::string& text);

struct TrainConfig {
  Stage stage = Stage::Pretrain;
  double p_mask = 0.75;       // pretrain masking ratio
  double p_m = 0.2;           // condition-drop probability
  double lambda_free = 1.0;
  double lambda_based = 1.0;
  double p_mask_based = 1.0;  // fine-tune condition-based branch
  double p_mask_free = 0.95;  // fine-tune condition-free branch
  int epochs = 80;
  long max_steps = 0;         // > 0 overrides epochs
  int batch_size = 8;
  double lr = 2e-4;
  double warmup_epochs = 5.0;
  double weight_decay = 0.05;
  double grad_clip = 1.0;     // <= 0 disables clipping
  double delta = cond::kFlowDelta;
  std::uint64_t seed = 0;
  int threads = 0;            // 0 means hardware concurrency

  static TrainConfig pretrain_defaults();
  static TrainConfig finetune_defaults();
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
/// Overlays keys of j on base; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base);

/// One training map in normalized units with both condition variants precomputed.
struct TrainingExample {
  std::string id;
  Field r_unit;
  cond::ConditionGrids grids;
  cond::ConditionGrids null_grids;
};

std::vector<TrainingExample> prepare_examples(const std::vector<const synth::DatasetSample*>& samples,
                                              const NormRange& norm);

/// Random draws for one sample in one forward pass.
struct SampleDraw {
  double t = 0.0;
  std::uint64_t mask_seed = 0;
  std::uint64_t noise_seed = 0;
  bool drop = false;
};

/// Draws for one optimizer step: one per sample in pretraining, two per sample in
/// fine-tuning (condition-based first, then condition-free). Depends only on
/// (config.seed, step), never on thread count.
std::vector<SampleDraw> draw_step(const TrainConfig& config, long step, std::size_t batch_size);

/// Condition variant a pretraining draw sees: real grids, or all-sentinel grids when dropped.
const cond::ConditionGrids& pretrain_grids(const TrainingExample& example, const SampleDraw& draw);

/// Loss and gradients for one sample and one forward; gradients stay on the tape.
struct ForwardResult {
  double loss = 0.0;
  std::unique_ptr<nn::Tape> tape;
};

/// Builds Z_t on the masked patches, runs the model and the velocity loss, and
/// back-propagates loss * weight onto the tape.
ForwardResult masked_flow_forward(const model::FarmModel& model, const PatchPlan& plan, const Field& r_unit,
                                  const cond::ConditionGrids& grids, double p_mask, const SampleDraw& draw,
                                  double weight, double delta);

struct StepRecord {
  long step = 0;
  Stage stage = Stage::Pretrain;
  double loss = 0.0;
  double loss_free = 0.0;   // fine-tune only
  double loss_based = 0.0;  // fine-tune only
  double lr = 0.0;
  double grad_norm = 0.0;
  double t_mean = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  int dropped = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> mask_seeds;
  std::vector<std::string> sample_ids;
};

nlohmann::json to_json(const StepRecord& r);

/// Drives pretraining (both encoder and decoder) or fine-tuning (decoder only,
/// encoder frozen) with AdamW under a warmup + cosine schedule.
class Trainer {
 public:
  Trainer(model::FarmModel& model, TrainConfig config, const VoxelGridSpec& grid);

  const TrainConfig& config() const { return config_; }
  long step_count() const { return step_; }
  /// Schedule length for a dataset of n examples.
  long total_steps(std::size_t n) const;
  long warmup_steps(std::size_t n) const;

  /// One optimizer update on the batch.
  StepRecord step(std::span<const TrainingExample* const> batch, double lr);

  /// Runs the full schedule, shuffling each epoch. on_step sees every record.
  std::vector<StepRecord> fit(const std::vector<TrainingExample>& data,
                              const std::function<void(const StepRecord&)>& on_step = {});

 private:
  model::FarmModel& model_;
  TrainConfig config_;
  PatchPlan plan_;
  nn::AdamW optimizer_;
  long step_ = 0;
};

}  // namespace farm::train
