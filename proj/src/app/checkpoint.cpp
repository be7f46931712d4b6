#include "farm/app/checkpoint.hpp"

#include <cstring>

#include "farm/app/config.hpp"
#include "farm/core/error.hpp"
#include "farm/core/hash.hpp"
#include "farm/core/io.hpp"

namespace farm::app {

namespace fs = std::filesystem;

void save_checkpoint(const fs::path& dir, const model::FarmModel& model, const CheckpointInfo& info) {
  fs::create_directories(dir);
  std::vector<std::byte> blob;
  nlohmann::json tensors = nlohmann::json::array();
  for (const nn::Parameter* p : model.params().all()) {
    const auto bytes = static_cast<std::size_t>(p->value.size()) * sizeof(double);
    tensors.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()},
                       {"offset", blob.size()}});
    const auto* src = reinterpret_cast<const std::byte*>(p->value.data());
    blob.insert(blob.end(), src, src + bytes);
  }
  io::write_bytes(dir / "tensors.bin", blob);
  nlohmann::json manifest{{"format", "farm-checkpoint"},
                          {"format_version", 1},
                          {"dtype", "float64-le"},
                          {"stage", info.stage},
                          {"step", info.step},
                          {"dataset_hash", info.dataset_hash},
                          {"norm", info.norm},
                          {"grid", info.grid},
                          {"model", model::to_json(model.config())},
                          {"parameter_count", model.params().scalar_count()},
                          {"tensors", tensors},
                          {"tensors_hash", hash_hex(blob)},
                          {"version", version()},
                          {"extra", info.extra}};
  io::write_json(dir / "manifest.json", manifest);
}

LoadedCheckpoint load_checkpoint(const fs::path& dir) {
  LoadedCheckpoint out;
  out.manifest = io::read_json(dir / "manifest.json");
  const auto& m = out.manifest;
  if (m.value("format", "") != "farm-checkpoint") throw IoError(dir.string() + ": not a checkpoint directory");
  if (m.value("dtype", "") != "float64-le") throw IoError(dir.string() + ": unsupported tensor dtype");
  const auto blob = io::read_bytes(dir / "tensors.bin");
  if (hash_hex(blob) != m.at("tensors_hash").get<std::string>()) {
    throw IoError((dir / "tensors.bin").string() + ": tensor hash mismatch");
  }
  try {
    out.info.stage = m.at("stage").get<std::string>();
    out.info.step = m.at("step").get<long>();
    out.info.dataset_hash = m.at("dataset_hash").get<std::string>();
    out.info.norm = m.at("norm").get<NormRange>();
    out.info.grid = m.at("grid").get<VoxelGridSpec>();
    out.info.extra = m.value("extra", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(dir.string() + ": malformed manifest: " + e.what());
  }
  model::ModelConfig config;
  try {
    config = model::model_config_from_json(m.at("model"));
  } catch (const ConfigError& e) {
    throw IoError(dir.string() + ": " + e.what());
  }
  out.model = std::make_unique<model::FarmModel>(config, 0);
  auto params = out.model->params().all();
  const auto& tensors = m.at("tensors");
  if (tensors.size() != params.size()) throw IoError(dir.string() + ": parameter count does not match the model");
  for (std::size_t k = 0; k < params.size(); ++k) {
    nn::Parameter& p = *params[k];
    const auto& t = tensors[k];
    const auto name = t.at("name").get<std::string>();
    const auto rows = t.at("rows").get<nn::Index>(), cols = t.at("cols").get<nn::Index>();
    const auto offset = t.at("offset").get<std::size_t>();
    if (name != p.name || rows != p.value.rows() || cols != p.value.cols()) {
      throw IoError(dir.string() + ": tensor '" + name + "' does not match model parameter '" + p.name + "'");
    }
    const auto bytes = static_cast<std::size_t>(rows * cols) * sizeof(double);
    if (offset + bytes > blob.size()) throw IoError(dir.string() + ": tensor '" + name + "' exceeds tensors.bin");
    std::memcpy(p.value.data(), blob.data() + offset, bytes);
  }
  if (!out.model->params().all_finite()) throw IoError(dir.string() + ": checkpoint holds non-finite parameters");
  return out;
}

}  // namespace farm::app
