#include "farm/app/config.hpp"

#include <algorithm>

#include "farm/core/error.hpp"
#include "farm/core/hash.hpp"
#include "farm/core/io.hpp"

#ifndef FARM_VERSION
#define FARM_VERSION "0.1.0-unknown"
#endif

namespace farm::app {

std::string version() { return FARM_VERSION; }

bool RunConfig::has_stage(const std::string& stage) const {
  return std::find(stages.begin(), stages.end(), stage) != stages.end();
}

std::string RunConfig::hash() const {
  // Worker counts never change results.
  auto j = to_json(*this);
  j["pretrain"].erase("threads");
  j["finetune"].erase("threads");
  return hash_hex(j.dump());
}

nlohmann::json to_json(const InferenceConfig& c) {
  return {{"modes", c.modes},   {"steps", c.steps}, {"sample_rate", c.sample_rate}, {"split", c.split},
          {"subset", c.subset}, {"seed", c.seed},   {"max_samples", c.max_samples}};
}

namespace {

InferenceConfig inference_from_json(const nlohmann::json& j) {
  io::reject_unknown_keys(j, {"modes", "steps", "sample_rate", "split", "subset", "seed", "max_samples"}, "inference");
  InferenceConfig c;
  c.modes = j.value("modes", c.modes);
  c.steps = j.value("steps", c.steps);
  c.sample_rate = j.value("sample_rate", c.sample_rate);
  c.split = j.value("split", c.split);
  c.subset = j.value("subset", c.subset);
  c.seed = j.value("seed", c.seed);
  c.max_samples = j.value("max_samples", c.max_samples);
  if (c.steps < 1) throw ConfigError("inference.steps must be >= 1");
  if (!(c.sample_rate > 0.0 && c.sample_rate <= 1.0)) throw ConfigError("inference.sample_rate must lie in (0, 1]");
  if (c.split != "train" && c.split != "val" && c.split != "test") {
    throw ConfigError("inference.split must be train, val or test");
  }
  for (const auto& m : c.modes) {
    if (m != "cond" && m != "free" && m != "hybrid") {
      throw ConfigError("inference.modes entries must be cond, free or hybrid, got '" + m + "'");
    }
  }
  return c;
}

BaselineConfig baseline_from_json(const nlohmann::json& j) {
  io::reject_unknown_keys(j, {"kriging", "max_neighbors", "bins"}, "baseline");
  BaselineConfig c;
  c.kriging = j.value("kriging", c.kriging);
  c.max_neighbors = j.value("max_neighbors", c.max_neighbors);
  c.bins = j.value("bins", c.bins);
  if (c.max_neighbors < 4) throw ConfigError("baseline.max_neighbors must be >= 4");
  if (c.bins < 1) throw ConfigError("baseline.bins must be >= 1");
  return c;
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  io::reject_unknown_keys(j,
                          {"name", "seed", "output_dir", "data_dir", "stages", "dataset", "model", "pretrain",
                           "finetune", "inference", "baseline", "threads"},
                          "run");
  RunConfig c;
  try {
    c.name = j.value("name", c.name);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", std::string());
    c.data_dir = j.value("data_dir", std::string());
    c.threads = j.value("threads", c.threads);
    if (j.contains("stages")) {
      c.stages = j.at("stages").get<std::vector<std::string>>();
      for (const auto& s : c.stages) {
        if (std::find(kStageOrder.begin(), kStageOrder.end(), s) == kStageOrder.end()) {
          throw ConfigError("unknown stage '" + s + "'");
        }
      }
    }
    if (j.contains("dataset")) c.dataset = synth::dataset_config_from_json(j.at("dataset"));
    if (j.contains("model")) c.model = model::model_config_from_json(j.at("model"));
    c.pretrain.seed = c.finetune.seed = c.inference.seed = c.seed;
    if (j.contains("pretrain")) {
      c.pretrain = train::train_config_from_json(j.at("pretrain"), c.pretrain);
      c.pretrain.stage = train::Stage::Pretrain;
    }
    if (j.contains("finetune")) {
      c.finetune = train::train_config_from_json(j.at("finetune"), c.finetune);
      c.finetune.stage = train::Stage::Finetune;
    }
    if (j.contains("inference")) {
      c.inference = inference_from_json(j.at("inference"));
      if (!j.at("inference").contains("seed")) c.inference.seed = c.seed;
    }
    if (j.contains("baseline")) c.baseline = baseline_from_json(j.at("baseline"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  if (c.threads < 0) throw ConfigError("threads must be non-negative");
  if (c.threads > 0) c.pretrain.threads = c.finetune.threads = c.threads;
  if (c.model.decoder.width % 2 != 0) throw ConfigError("model widths must be even");
  c.source = j;
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = io::read_json(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return run_config_from_json(j);
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"name", c.name},
          {"seed", c.seed},
          {"data_dir", c.data_dir.string()},
          {"stages", c.stages},
          {"dataset", synth::to_json(c.dataset)},
          {"model", model::to_json(c.model)},
          {"pretrain", train::to_json(c.pretrain)},
          {"finetune", train::to_json(c.finetune)},
          {"inference", to_json(c.inference)},
          {"baseline", {{"kriging", c.baseline.kriging}, {"max_neighbors", c.baseline.max_neighbors},
                        {"bins", c.baseline.bins}}}};
}

nlohmann::json provenance(const std::string& config_hash, std::uint64_t seed) {
  return {{"config_hash", config_hash}, {"seed", seed}, {"version", version()}};
}

}  // namespace farm::app
