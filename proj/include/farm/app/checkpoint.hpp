#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "json.hpp"

#include "farm/model/farm_model.hpp"

namespace farm::app {

struct CheckpointInfo {
  std::string stage;          // pretrain | finetune
  long step = 0;
  std::string dataset_hash;
  NormRange norm;
  VoxelGridSpec grid;
  nlohmann::json extra = nlohmann::json::object();
};

/// Writes <dir>/manifest.json and <dir>/tensors.bin (little-endian float64, in
/// parameter creation order). The manifest hash covers every blob byte.
void save_checkpoint(const std::filesystem::path& dir, const model::FarmModel& model, const CheckpointInfo& info);

struct LoadedCheckpoint {
  std::unique_ptr<model::FarmModel> model;
  CheckpointInfo info;
  nlohmann::json manifest;
};

/// Verifies the tensor hash and every parameter shape before returning.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace farm::app
