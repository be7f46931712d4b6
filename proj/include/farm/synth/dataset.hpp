#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "farm/core/grid.hpp"
#include "farm/core/types.hpp"
#include "farm/synth/propagation.hpp"
#include "farm/synth/scene.hpp"

namespace farm::synth {

/// Carrier frequencies (GHz) a dataset configuration may use.
inline constexpr std::array<double, 7> kCarrierFrequenciesGhz{2.1, 2.6, 3.3, 3.5, 4.9, 5.9, 7.1};

struct SubsetConfig {
  std::string name = "d1";
  std::vector<double> frequencies_ghz{2.1, 3.3, 5.9};
  std::vector<AntennaType> antennas{AntennaType::Iso};
  int scenes = 2;
  int tx_per_scene = 2;
  int buildings_per_scene = 10;
  int max_building_height = 0;  // levels; 0 means 3/4 of H
  bool zero_shot = false;       // every sample goes to the test split
};

struct DatasetConfig {
  VoxelGridSpec grid{64, 64, 8, 4.0, {0.0, 0.0, 0.0}};
  double tx_power_dbm = 30.0;
  PropagationParams propagation;
  std::optional<NormRange> norm;  // computed from the data when absent
  std::array<int, 3> split{8, 1, 1};
  std::vector<SubsetConfig> subsets{SubsetConfig{}};

  void validate() const;
  std::size_t sample_count() const;
};

DatasetConfig dataset_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DatasetConfig& config);

/// Train/val/test assignment of n samples by a seeded shuffle.
std::vector<std::string> assign_splits(std::size_t n, const std::array<int, 3>& ratio, std::uint64_t seed);

/// Writes manifest.json, volumes/<id>.f32 and buildings/<scene>.u8 under out_dir.
nlohmann::json build_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir,
                             std::uint64_t seed, int jobs = 1, const std::string& version = "");

struct DatasetSample {
  std::string id;
  std::string subset;
  std::string split;
  ArmVolume volume;
  std::shared_ptr<const BuildingGrid> buildings;
  BsConfig bs;
};

class Dataset {
 public:
  static Dataset load(const std::filesystem::path& dir);

  const nlohmann::json& manifest() const { return manifest_; }
  const VoxelGridSpec& grid() const { return grid_; }
  const NormRange& norm() const { return norm_; }
  const std::string& content_hash() const { return content_hash_; }
  const std::vector<DatasetSample>& samples() const { return samples_; }
  std::vector<const DatasetSample*> select(const std::string& split, const std::string& subset = "") const;

 private:
  nlohmann::json manifest_;
  VoxelGridSpec grid_;
  NormRange norm_;
  std::string content_hash_;
  std::vector<DatasetSample> samples_;
};

}  // namespace farm::synth
