#include "farm/app/commands.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

#include "farm/app/checkpoint.hpp"
#include "farm/core/error.hpp"
#include "farm/core/hash.hpp"
#include "farm/core/io.hpp"
#include "farm/core/rng.hpp"
#include "farm/eval/kriging.hpp"

namespace farm::app {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<const synth::DatasetSample*> pick_samples(const synth::Dataset& data, const std::string& split,
                                                      const std::string& subset, std::size_t max_samples,
                                                      const std::vector<std::string>& ids = {}) {
  std::vector<const synth::DatasetSample*> out;
  if (!ids.empty()) {
    for (const auto& id : ids) {
      const auto it = std::find_if(data.samples().begin(), data.samples().end(),
                                   [&](const synth::DatasetSample& s) { return s.id == id; });
      if (it == data.samples().end()) throw InvalidArgument("dataset has no sample '" + id + "'");
      out.push_back(&*it);
    }
    return out;
  }
  out = data.select(split, subset);
  if (max_samples > 0 && out.size() > max_samples) out.resize(max_samples);
  if (out.empty()) {
    throw InvalidArgument("no samples in split '" + split + "'" + (subset.empty() ? "" : " subset '" + subset + "'"));
  }
  return out;
}

std::uint64_t sample_stream(const std::string& id) {
  Fnv1a h;
  h.update(id);
  return h.digest();
}

}  // namespace

fs::path resolve_data_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FARM_DATA_DIR"); env && *env) return env;
  throw ConfigError("no dataset directory: pass --data or set FARM_DATA_DIR");
}

fs::path sidecar_path(const fs::path& volume) {
  fs::path p = volume;
  return p.replace_extension(".json");
}

void write_volume(const fs::path& path, const ArmVolume& volume, const nlohmann::json& metadata) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::write_f32(path, volume.values.data());
  nlohmann::json side{{"format", "farm-volume"},
                      {"dtype", "float32-le"},
                      {"units", "dBm"},
                      {"grid", volume.spec()},
                      {"norm", volume.norm},
                      {"hash", hash_hex(io::encode_f32(volume.values.data()))},
                      {"metadata", metadata}};
  io::write_json(sidecar_path(path), side);
}

ArmVolume read_volume(const fs::path& path, const std::optional<VoxelGridSpec>& fallback_grid) {
  std::optional<VoxelGridSpec> grid = fallback_grid;
  NormRange norm;
  if (fs::exists(sidecar_path(path))) {
    const auto side = io::read_json(sidecar_path(path));
    try {
      grid = side.at("grid").get<VoxelGridSpec>();
      if (side.contains("norm")) norm = side.at("norm").get<NormRange>();
    } catch (const nlohmann::json::exception& e) {
      throw IoError(sidecar_path(path).string() + ": " + e.what());
    }
  }
  if (!grid) throw IoError(path.string() + ": no sidecar with a grid and no grid given");
  return ArmVolume{Field(*grid, io::read_f32(path, grid->voxel_count())), norm};
}

nlohmann::json cmd_gen(const synth::DatasetConfig& config, const fs::path& out, std::uint64_t seed, int jobs) {
  const auto start = Clock::now();
  auto manifest = synth::build_dataset(config, out, seed, jobs, version());
  return {{"dataset", out.string()},
          {"content_hash", manifest.at("content_hash")},
          {"samples", manifest.at("samples").size()},
          {"seconds", seconds_since(start)}};
}

nlohmann::json cmd_train(const TrainOptions& o) {
  const auto start = Clock::now();
  const auto data = synth::Dataset::load(o.data);
  const bool finetune = o.train.stage == train::Stage::Finetune;

  std::unique_ptr<model::FarmModel> model;
  NormRange norm = data.norm();
  if (o.init) {
    auto loaded = load_checkpoint(*o.init);
    if (!(loaded.info.grid == data.grid())) throw InvalidArgument("checkpoint grid does not match the dataset grid");
    norm = loaded.info.norm;
    model = std::move(loaded.model);
  } else {
    if (finetune) throw InvalidArgument("fine-tuning needs a pretrained checkpoint (--ckpt)");
    model = std::make_unique<model::FarmModel>(o.model, derive_seed(o.train.seed, 0x6d6f64656cULL));
  }

  const auto examples = train::prepare_examples(pick_samples(data, o.split, "", 0), norm);
  const std::string enc_before = model->params().checksum("enc.");

  const fs::path log_path = o.log.empty() ? o.out / "train_log.ndjson" : o.log;
  if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
  std::ofstream log(log_path);
  if (!log) throw IoError(log_path.string() + ": cannot open for writing");

  train::Trainer trainer(*model, o.train, data.grid());
  const long total = trainer.total_steps(examples.size());
  double last_loss = 0.0, tail = 0.0;
  std::size_t tail_n = 0;
  trainer.fit(examples, [&](const train::StepRecord& r) {
    nlohmann::json j = train::to_json(r);
    j["elapsed_s"] = seconds_since(start);
    log << j.dump() << '\n' << std::flush;
    last_loss = r.loss;
    if (r.step >= total - 10) {
      tail += r.loss;
      ++tail_n;
    }
    if (o.progress && (r.step % 50 == 0 || r.step + 1 == total)) {
      *o.progress << train::to_string(r.stage) << " step " << r.step + 1 << "/" << total << " loss "
                  << std::setprecision(5) << r.loss << " lr " << r.lr << " (" << std::fixed << std::setprecision(1)
                  << seconds_since(start) << " s)" << std::defaultfloat << '\n'
                  << std::flush;
    }
  });

  const std::string enc_after = model->params().checksum("enc.");
  if (finetune && enc_before != enc_after) throw NumericalError("fine-tuning modified encoder parameters");

  CheckpointInfo info;
  info.stage = train::to_string(o.train.stage);
  info.step = trainer.step_count();
  info.dataset_hash = data.content_hash();
  info.norm = norm;
  info.grid = data.grid();
  info.extra = {{"train", train::to_json(o.train)},
                {"provenance", provenance(o.config_hash, o.train.seed)},
                {"examples", examples.size()},
                {"encoder_checksum", enc_after}};
  save_checkpoint(o.out, *model, info);
  const auto manifest = io::read_json(o.out / "manifest.json");
  return {{"checkpoint", o.out.string()},
          {"stage", info.stage},
          {"steps", info.step},
          {"final_loss", last_loss},
          {"tail_loss", tail_n ? tail / static_cast<double>(tail_n) : last_loss},
          {"tensors_hash", manifest.at("tensors_hash")},
          {"encoder_checksum", enc_after},
          {"log", log_path.string()},
          {"seconds", seconds_since(start)}};
}

SparseObservation observations_for(const synth::DatasetSample& sample, const PatchPlan& plan,
                                   const InferenceConfig& inference) {
  return infer::sample_observations(sample.volume, plan, inference.sample_rate,
                                    derive_seed(inference.seed, sample_stream(sample.id)));
}

nlohmann::json cmd_infer(const InferOptions& o) {
  const auto start = Clock::now();
  const auto loaded = load_checkpoint(o.ckpt);
  const auto data = synth::Dataset::load(o.data);
  if (!(loaded.info.grid == data.grid())) throw InvalidArgument("checkpoint grid does not match the dataset grid");
  const NormRange norm = loaded.info.norm;
  const PatchPlan plan(data.grid(), loaded.model->config().patch);
  const infer::FarmDenoiser denoiser(*loaded.model);
  const auto samples =
      pick_samples(data, o.inference.split, o.inference.subset, o.inference.max_samples, o.sample_ids);

  nlohmann::json written = nlohmann::json::array();
  for (const auto* s : samples) {
    infer::InferenceRequest req;
    req.mode = o.mode;
    req.steps = o.inference.steps;
    req.seed = derive_seed(o.inference.seed ^ 0x5a5a5a5aULL, sample_stream(s->id));
    if (o.mode != infer::Mode::ConditionFree) req.grids = cond::build_condition_grids(*s->buildings, s->bs, norm);
    if (o.mode != infer::Mode::ConditionOnly) req.observations = observations_for(*s, plan, o.inference);
    const auto result = infer::sample(denoiser, req, plan, norm);
    nlohmann::json meta = result.metadata;
    meta["sample"] = s->id;
    meta["subset"] = s->subset;
    meta["checkpoint"] = o.ckpt.string();
    meta["provenance"] = provenance(o.config_hash, o.inference.seed);
    write_volume(o.out / (s->id + ".f32"), result.volume, meta);
    written.push_back(s->id);
  }
  return {{"mode", infer::to_string(o.mode)},
          {"out", o.out.string()},
          {"samples", written},
          {"steps", o.inference.steps},
          {"seconds", seconds_since(start)}};
}

nlohmann::json cmd_baseline_kriging(const KrigingOptionsCli& o) {
  const auto start = Clock::now();
  const auto data = synth::Dataset::load(o.data);
  const PatchPlan plan(data.grid(), o.model.patch);
  const auto samples = pick_samples(data, o.inference.split, o.inference.subset, o.inference.max_samples);
  eval::KrigingOptions ko;
  ko.bins = o.baseline.bins;
  ko.max_neighbors = o.baseline.max_neighbors;
  ko.threads = o.threads;
  nlohmann::json written = nlohmann::json::array();
  std::size_t fallbacks = 0;
  for (const auto* s : samples) {
    const auto obs = observations_for(*s, plan, o.inference);
    auto result = eval::kriging_predict(obs, data.grid(), data.norm(), ko);
    fallbacks += result.fallback_queries;
    nlohmann::json meta = result.metadata;
    meta["mode"] = "kriging";
    meta["sample"] = s->id;
    meta["subset"] = s->subset;
    meta["sample_rate"] = obs.sample_rate;
    meta["provenance"] = provenance(o.config_hash, o.inference.seed);
    write_volume(o.out / (s->id + ".f32"), result.volume, meta);
    written.push_back(s->id);
  }
  return {{"mode", "kriging"},
          {"out", o.out.string()},
          {"samples", written},
          {"fallback_queries", fallbacks},
          {"seconds", seconds_since(start)}};
}

nlohmann::json cmd_eval_dir(const fs::path& pred_dir, const fs::path& data_dir, const fs::path& out,
                            const std::string& label, const std::string& config_hash) {
  const auto data = synth::Dataset::load(data_dir);
  std::map<std::string, const synth::DatasetSample*> by_id;
  for (const auto& s : data.samples()) by_id[s.id] = &s;
  const double r = data.norm().span();

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(pred_dir)) {
    if (e.path().extension() == ".f32") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidArgument(pred_dir.string() + ": no predicted volumes");

  std::vector<eval::MetricsReport> reports;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& f : files) {
    const auto id = f.stem().string();
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw InvalidArgument(f.string() + ": no dataset sample with id '" + id + "'");
    const ArmVolume pred = read_volume(f, data.grid());
    if (!(pred.spec() == data.grid())) throw InvalidArgument(f.string() + ": grid does not match the dataset");
    reports.push_back(eval::evaluate(pred.values, it->second->volume.values, r));
    rows.push_back({{"id", id}, {"subset", it->second->subset}, {"metrics", eval::to_json(reports.back())}});
  }
  const auto avg = eval::average(reports);
  // Provenance of the predictions themselves, when their sidecars carry it.
  std::uint64_t seed = 0;
  std::string hash = config_hash;
  if (fs::exists(sidecar_path(files.front()))) {
    const auto side = io::read_json(sidecar_path(files.front()));
    const auto* meta = side.contains("metadata") ? &side.at("metadata") : &side;
    if (meta->contains("provenance")) {
      seed = meta->at("provenance").value("seed", seed);
      if (hash.empty()) hash = meta->at("provenance").value("config_hash", hash);
    }
  }
  nlohmann::json doc{{"kind", "farm-metrics"},
                     {"label", label},
                     {"count", reports.size()},
                     {"r", r},
                     {"average", eval::to_json(avg)},
                     {"samples", rows},
                     {"dataset_hash", data.content_hash()},
                     {"provenance", provenance(hash, seed)}};
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  io::write_json(out, doc);
  return {{"label", label}, {"count", reports.size()}, {"nmse_db", avg.nmse_db}, {"ssim", avg.ssim},
          {"report", out.string()}};
}

eval::MetricsReport cmd_eval_files(const fs::path& pred, const fs::path& truth, std::optional<double> r,
                                   const fs::path& out) {
  const ArmVolume p = read_volume(pred);
  const ArmVolume t = read_volume(truth, p.spec());
  if (!(p.spec() == t.spec())) throw InvalidArgument("prediction and truth grids differ");
  const double range = r.value_or(p.norm.span());
  const auto report = eval::evaluate(p.values, t.values, range);
  nlohmann::json doc = eval::to_json(report);
  doc["pred"] = pred.string();
  doc["truth"] = truth.string();
  doc["version"] = version();
  if (!out.empty()) io::write_json(out, doc);
  return report;
}

}  // namespace farm::app
