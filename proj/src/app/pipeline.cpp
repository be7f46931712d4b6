#include "farm/app/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <ostream>
#include <thread>

#include "farm/app/commands.hpp"
#include "farm/app/report.hpp"
#include "farm/core/error.hpp"
#include "farm/core/hash.hpp"
#include "farm/core/io.hpp"

namespace farm::app {

namespace fs = std::filesystem;

RunLayout run_layout(const RunConfig& config, const fs::path& out_dir) {
  RunLayout l;
  l.root = out_dir.empty() ? config.output_dir : out_dir;
  if (l.root.empty()) throw ConfigError("no output directory: set output_dir or pass --out");
  if (config.has_stage("gen")) {
    l.data = l.root / "data";
  } else if (!config.data_dir.empty()) {
    l.data = config.data_dir;
  } else {
    l.data = resolve_data_dir("");
  }
  return l;
}

namespace {

std::string upstream_hash(const RunLayout& layout, const std::string& stage) {
  const fs::path p = layout.stamp(stage);
  if (!fs::exists(p)) return "";
  return io::read_json(p).value("output_hash", "");
}

/// Latest checkpoint produced by the run, or the one a skipped stage left behind.
fs::path model_checkpoint(const RunConfig& c, const RunLayout& layout) {
  if (c.has_stage("finetune") || fs::exists(layout.checkpoint("finetune") / "manifest.json")) {
    return layout.checkpoint("finetune");
  }
  return layout.checkpoint("pretrain");
}

/// Summary without wall-clock fields, so identical work hashes identically.
nlohmann::json timeless(nlohmann::json j) {
  if (j.is_object()) {
    j.erase("seconds");
    for (auto& [k, v] : j.items()) v = timeless(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = timeless(v);
  }
  return j;
}

}  // namespace

std::vector<StageOutcome> run_pipeline(const RunConfig& c, const fs::path& out_dir, bool force,
                                       std::ostream& progress) {
  const RunLayout layout = run_layout(c, out_dir);
  fs::create_directories(layout.root / "stamps");
  fs::create_directories(layout.root / "logs");
  const std::string config_hash = c.hash();
  io::write_json(layout.root / "run_config.json",
                 {{"config", to_json(c)}, {"provenance", provenance(config_hash, c.seed)}});

  const auto infer_json = to_json(c.inference);
  std::vector<StageOutcome> outcomes;
  for (const auto& stage : kStageOrder) {
    if (!c.has_stage(stage)) continue;

    // Input identity: stage settings plus the output hashes of what it consumes.
    nlohmann::json inputs{{"stage", stage}, {"version", version()}};
    if (stage == "gen") {
      inputs["dataset"] = synth::to_json(c.dataset);
      inputs["seed"] = c.seed;
    } else if (stage == "pretrain") {
      inputs["model"] = model::to_json(c.model);
      inputs["train"] = train::to_json(c.pretrain);
      inputs["train"].erase("threads");
      inputs["data"] = upstream_hash(layout, "gen");
    } else if (stage == "finetune") {
      inputs["train"] = train::to_json(c.finetune);
      inputs["train"].erase("threads");
      inputs["init"] = upstream_hash(layout, "pretrain");
    } else if (stage == "infer") {
      inputs["inference"] = infer_json;
      inputs["model"] = upstream_hash(layout, "finetune") + upstream_hash(layout, "pretrain");
    } else if (stage == "baseline") {
      inputs["inference"] = infer_json;
      inputs["baseline"] = {{"kriging", c.baseline.kriging}, {"max_neighbors", c.baseline.max_neighbors},
                            {"bins", c.baseline.bins}};
      inputs["patch"] = {c.model.patch.l, c.model.patch.w, c.model.patch.h};
      inputs["data"] = upstream_hash(layout, "gen");
    } else if (stage == "eval") {
      inputs["infer"] = upstream_hash(layout, "infer");
      inputs["baseline"] = upstream_hash(layout, "baseline");
    } else if (stage == "report") {
      inputs["eval"] = upstream_hash(layout, "eval");
    }
    const std::string input_hash = hash_hex(inputs.dump());

    const fs::path stamp = layout.stamp(stage);
    if (!force && fs::exists(stamp)) {
      const auto s = io::read_json(stamp);
      if (s.value("input_hash", "") == input_hash) {
        progress << "[" << stage << "] up to date, skipped\n" << std::flush;
        outcomes.push_back({stage, true, 0.0, s.value("summary", nlohmann::json::object())});
        continue;
      }
    }

    progress << "[" << stage << "] running\n" << std::flush;
    const auto start = std::chrono::steady_clock::now();
    const fs::path log = layout.log(stage);
    nlohmann::json summary;
    try {
      if (stage == "gen") {
        summary = cmd_gen(c.dataset, layout.data, c.seed,
                          c.threads > 0 ? c.threads : static_cast<int>(std::thread::hardware_concurrency()));
      } else if (stage == "pretrain" || stage == "finetune") {
        TrainOptions o;
        o.data = layout.data;
        o.out = layout.checkpoint(stage);
        o.model = c.model;
        o.train = stage == "pretrain" ? c.pretrain : c.finetune;
        if (stage == "finetune") o.init = layout.checkpoint("pretrain");
        o.log = log;
        o.config_hash = config_hash;
        o.progress = &progress;
        summary = cmd_train(o);
      } else if (stage == "infer") {
        summary = nlohmann::json::array();
        for (const auto& m : c.inference.modes) {
          InferOptions o;
          o.ckpt = model_checkpoint(c, layout);
          o.data = layout.data;
          o.mode = infer::parse_mode(m);
          o.out = layout.predictions(infer::to_string(o.mode));
          o.inference = c.inference;
          o.config_hash = config_hash;
          summary.push_back(cmd_infer(o));
        }
      } else if (stage == "baseline") {
        summary = nlohmann::json::object();
        if (c.baseline.kriging) {
          KrigingOptionsCli o;
          o.data = layout.data;
          o.out = layout.predictions("kriging");
          o.inference = c.inference;
          o.baseline = c.baseline;
          o.model = c.model;
          o.config_hash = config_hash;
          o.threads = c.threads;
          summary = cmd_baseline_kriging(o);
        }
      } else if (stage == "eval") {
        summary = nlohmann::json::array();
        for (const auto& e : fs::directory_iterator(layout.root / "predictions")) {
          if (!e.is_directory()) continue;
          const std::string label = e.path().filename().string();
          summary.push_back(cmd_eval_dir(e.path(), layout.data, layout.metrics(label), c.name + "/" + label,
                                         config_hash));
        }
      } else if (stage == "report") {
        summary = write_report(collect_reports(layout.root / "metrics"), layout.report());
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      std::ofstream(log, std::ios::app) << nlohmann::json{{"stage", stage}, {"error", e.what()}}.dump() << '\n';
      throw StageFailure(stage, log, e.what());
    }

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const nlohmann::json record{{"stage", stage},
                                {"input_hash", input_hash},
                                {"output_hash", hash_hex(timeless(summary).dump() + input_hash)},
                                {"seconds", seconds},
                                {"summary", summary},
                                {"provenance", provenance(config_hash, c.seed)}};
    io::write_json(stamp, record);
    progress << "[" << stage << "] done in " << seconds << " s\n" << std::flush;
    outcomes.push_back({stage, false, seconds, summary});
  }
  return outcomes;
}

}  // namespace farm::app
