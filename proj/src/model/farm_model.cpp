#include "farm/model/farm_model.hpp"

#include <algorithm>

#include "farm/core/error.hpp"
#include "farm/core/io.hpp"

namespace farm::model {

using nn::Matrix;
using nn::Var;

void ModelConfig::validate() const {
  encoder.validate();
  decoder.validate();
  require(patch.l >= 1 && patch.w >= 1 && patch.h >= 1, "patch dimensions must be positive");
}

ModelConfig ModelConfig::profile(const std::string& name) {
  ModelConfig c;
  auto set = [&c](int enc_depth, int dec_depth, int width) {
    c.encoder.depth = enc_depth;
    c.encoder.width = width;
    c.decoder.depth = dec_depth;
    c.decoder.width = width;
    c.encoder.heads = c.decoder.heads = 8;
  };
  if (name == "tiny") {
    set(4, 3, 128);
  } else if (name == "small") {
    set(6, 4, 256);
  } else if (name == "base") {
    set(8, 6, 512);
  } else if (name == "large") {
    set(10, 8, 768);
  } else {
    throw ConfigError("unknown model profile '" + name + "' (expected tiny, small, base or large)");
  }
  return c;
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"encoder",
           {{"depth", c.encoder.depth},
            {"width", c.encoder.width},
            {"heads", c.encoder.heads},
            {"mlp_ratio", c.encoder.mlp_ratio},
            {"absolute_pe", c.encoder.absolute_pe},
            {"rope", c.encoder.rope}}},
          {"decoder",
           {{"depth", c.decoder.depth},
            {"width", c.decoder.width},
            {"heads", c.decoder.heads},
            {"mlp_ratio", c.decoder.mlp_ratio},
            {"time_dim", c.decoder.time_dim},
            {"freq_count", c.decoder.freq_count},
            {"norm", c.decoder.norm == DecoderNorm::Rms ? "rms" : "layer"},
            {"absolute_pe", c.decoder.absolute_pe},
            {"rope", c.decoder.rope}}},
          {"patch", {c.patch.l, c.patch.w, c.patch.h}}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  io::reject_unknown_keys(j, {"profile", "encoder", "decoder", "patch"}, "model");
  ModelConfig c = j.contains("profile") ? ModelConfig::profile(j.at("profile").get<std::string>()) : ModelConfig{};
  try {
    if (j.contains("encoder")) {
      const auto& e = j.at("encoder");
      io::reject_unknown_keys(e, {"depth", "width", "heads", "mlp_ratio", "absolute_pe", "rope"}, "model.encoder");
      c.encoder.depth = e.value("depth", c.encoder.depth);
      c.encoder.width = e.value("width", c.encoder.width);
      c.encoder.heads = e.value("heads", c.encoder.heads);
      c.encoder.mlp_ratio = e.value("mlp_ratio", c.encoder.mlp_ratio);
      c.encoder.absolute_pe = e.value("absolute_pe", c.encoder.absolute_pe);
      c.encoder.rope = e.value("rope", c.encoder.rope);
    }
    if (j.contains("decoder")) {
      const auto& d = j.at("decoder");
      io::reject_unknown_keys(
          d, {"depth", "width", "heads", "mlp_ratio", "time_dim", "freq_count", "norm", "absolute_pe", "rope"},
          "model.decoder");
      c.decoder.depth = d.value("depth", c.decoder.depth);
      c.decoder.width = d.value("width", c.decoder.width);
      c.decoder.heads = d.value("heads", c.decoder.heads);
      c.decoder.mlp_ratio = d.value("mlp_ratio", c.decoder.mlp_ratio);
      c.decoder.time_dim = d.value("time_dim", c.decoder.time_dim);
      c.decoder.freq_count = d.value("freq_count", c.decoder.freq_count);
      c.decoder.absolute_pe = d.value("absolute_pe", c.decoder.absolute_pe);
      c.decoder.rope = d.value("rope", c.decoder.rope);
      if (d.contains("norm")) {
        const auto norm = d.at("norm").get<std::string>();
        if (norm == "rms") {
          c.decoder.norm = DecoderNorm::Rms;
        } else if (norm == "layer") {
          c.decoder.norm = DecoderNorm::Layer;
        } else {
          throw ConfigError("model.decoder.norm must be 'rms' or 'layer', got '" + norm + "'");
        }
      }
    }
    if (j.contains("patch")) {
      const auto p = j.at("patch").get<std::vector<int>>();
      if (p.size() != 3) throw ConfigError("model.patch must hold three integers");
      c.patch = {p[0], p[1], p[2]};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  return c;
}

Matrix patch_rows(const cond::ConditionedInput& input, const PatchPlan& plan, const std::vector<int>& ids) {
  const int pv = plan.patch().voxels();
  Matrix rows(static_cast<nn::Index>(ids.size()), cond::kChannels * pv);
  std::vector<double> buffer(static_cast<std::size_t>(pv));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (int c = 0; c < cond::kChannels; ++c) {
      plan.gather(input.channels[static_cast<std::size_t>(c)].data(), ids[i], buffer);
      for (int v = 0; v < pv; ++v) rows(static_cast<nn::Index>(i), c * pv + v) = buffer[static_cast<std::size_t>(v)];
    }
  }
  return rows;
}

Matrix field_patches(const Field& field, const PatchPlan& plan) {
  require(field.spec() == plan.spec(), "field does not match the patch plan");
  const int pv = plan.patch().voxels();
  Matrix out(plan.count(), pv);
  for (int p = 0; p < plan.count(); ++p) {
    plan.gather(field.data(), p, std::span<double>(out.row(p).data(), static_cast<std::size_t>(pv)));
  }
  return out;
}

Field unpatchify(const Matrix& patches, const PatchPlan& plan) {
  const int pv = plan.patch().voxels();
  require(patches.rows() == plan.count() && patches.cols() == pv, "unpatchify: prediction shape mismatch");
  Field out(plan.spec(), 0.0);
  for (int p = 0; p < plan.count(); ++p) {
    plan.scatter(std::span<const double>(patches.row(p).data(), static_cast<std::size_t>(pv)), p, out.data());
  }
  return out;
}

namespace {

std::vector<VoxelCoord> coords_of(const PatchPlan& plan, const std::vector<int>& ids) {
  std::vector<VoxelCoord> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(plan.coord(id));
  return out;
}

}  // namespace

FarmModel::FarmModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config),
      init_rng_(seed),
      encoder_(params_, config.encoder, config.patch, init_rng_),
      decoder_(params_, config.decoder, config.patch, config.encoder.width, init_rng_) {
  config_.validate();
}

Var FarmModel::encode(nn::Tape& tape, const cond::ConditionedInput& input, const PatchPlan& plan) const {
  require(plan.patch() == config_.patch, "patch plan does not match the model patch size");
  require(input.mask.patch_count() == plan.count(), "mask does not cover the patch plan");
  const auto& visible = input.mask.visible_ids;
  if (visible.empty()) return {};
  return encoder_.forward(tape, patch_rows(input, plan, visible), coords_of(plan, visible));
}

Var FarmModel::decode(nn::Tape& tape, const Var& encoded, const cond::ConditionedInput& input,
                      const PatchPlan& plan) const {
  const auto& visible = input.mask.visible_ids;
  const auto& masked = input.mask.masked_ids;
  require(encoded.valid() == !visible.empty(), "encoder output does not match the visible set");

  // Row of each patch inside [aligned visible; embedded masked].
  std::vector<int> order(static_cast<std::size_t>(plan.count()), -1);
  for (std::size_t i = 0; i < visible.size(); ++i) order[static_cast<std::size_t>(visible[i])] = static_cast<int>(i);
  for (std::size_t i = 0; i < masked.size(); ++i) {
    order[static_cast<std::size_t>(masked[i])] = static_cast<int>(visible.size() + i);
  }
  require(std::find(order.begin(), order.end(), -1) == order.end(), "mask leaves patches unassigned");

  std::vector<Var> parts;
  if (!visible.empty()) parts.push_back(decoder_.align_encoder(tape, encoded));
  if (!masked.empty()) parts.push_back(decoder_.embed_noisy(tape, patch_rows(input, plan, masked)));
  const Var stacked = parts.size() == 1 ? parts.front() : nn::concat_rows(parts);
  const Var full = nn::gather_rows(stacked, order);
  return decoder_.decode(tape, full, input.t, plan.coords());
}

Var FarmModel::forward(nn::Tape& tape, const cond::ConditionedInput& input, const PatchPlan& plan) const {
  return decode(tape, encode(tape, input, plan), input, plan);
}

Field FarmModel::predict(const cond::ConditionedInput& input, const PatchPlan& plan) const {
  nn::Tape tape(false);
  return unpatchify(forward(tape, input, plan).value(), plan);
}

}  // namespace farm::model
