#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "farm/app/commands.hpp"
#include "farm/app/pipeline.hpp"
#include "farm/app/report.hpp"
#include "farm/core/error.hpp"
#include "farm/core/io.hpp"

namespace fs = std::filesystem;
using namespace farm;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

app::RunConfig config_or_default(const std::string& path) {
  if (path.empty()) return app::run_config_from_json(nlohmann::json::object());
  return app::load_run_config(path);
}

/// A bare dataset document or a run config holding one under "dataset".
synth::DatasetConfig dataset_config(const std::string& path, std::uint64_t* seed) {
  if (path.empty()) return {};
  nlohmann::json j;
  try {
    j = io::read_json(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("dataset") || j.contains("stages")) {
    auto rc = app::run_config_from_json(j);
    if (seed && j.contains("seed")) *seed = rc.seed;
    return rc.dataset;
  }
  return synth::dataset_config_from_json(j);
}

void print(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Aerial radio map estimation: data synthesis, training, inference and evaluation"};
  cli.require_subcommand(1);
  cli.set_version_flag("--version", app::version());

  // gen
  auto* gen = cli.add_subcommand("gen", "Synthesize a dataset of scenes and radio maps");
  std::string gen_config, gen_out;
  std::uint64_t gen_seed = 0;
  int gen_jobs = static_cast<int>(std::thread::hardware_concurrency());
  gen->add_option("--config", gen_config, "Dataset or run config (JSON)");
  gen->add_option("--out", gen_out, "Output dataset directory")->required();
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--jobs", gen_jobs, "Worker threads");

  // pretrain / finetune
  struct TrainFlags {
    std::string data, config, out, ckpt, log;
    std::optional<std::uint64_t> seed;
    std::optional<long> steps;
    std::optional<int> batch;
    std::optional<double> lr;
    int threads = 0;
  };
  TrainFlags pt, ft;
  auto add_train_flags = [](CLI::App* sub, TrainFlags& f) {
    sub->add_option("--data", f.data, "Dataset directory (default $FARM_DATA_DIR)");
    sub->add_option("--config", f.config, "Run config (JSON)");
    sub->add_option("--out", f.out, "Output checkpoint directory")->required();
    sub->add_option("--log", f.log, "NDJSON step log");
    sub->add_option("--seed", f.seed, "Training seed");
    sub->add_option("--steps", f.steps, "Total optimizer steps (overrides epochs)");
    sub->add_option("--batch", f.batch, "Batch size");
    sub->add_option("--lr", f.lr, "Peak learning rate");
    sub->add_option("--threads", f.threads, "Worker threads");
  };
  auto* pretrain = cli.add_subcommand("pretrain", "Masked flow-matching pretraining of encoder and decoder");
  add_train_flags(pretrain, pt);
  auto* finetune = cli.add_subcommand("finetune", "Decoder-only fine-tuning with the encoder frozen");
  add_train_flags(finetune, ft);
  finetune->add_option("--ckpt", ft.ckpt, "Pretrained checkpoint")->required();

  // infer
  auto* inf = cli.add_subcommand("infer", "Estimate radio maps with a trained checkpoint");
  std::string inf_mode = "cond", inf_ckpt, inf_data, inf_out, inf_config;
  std::optional<double> inf_rate;
  std::optional<int> inf_steps;
  std::optional<std::uint64_t> inf_seed;
  std::optional<std::string> inf_split, inf_subset;
  std::size_t inf_max = 0;
  std::vector<std::string> inf_samples;
  inf->add_option("--mode", inf_mode, "free | cond | hybrid")->check(CLI::IsMember({"free", "cond", "hybrid"}));
  inf->add_option("--ckpt", inf_ckpt, "Checkpoint directory")->required();
  inf->add_option("--data", inf_data, "Dataset directory (default $FARM_DATA_DIR)");
  inf->add_option("--out", inf_out, "Output directory for predicted volumes")->required();
  inf->add_option("--config", inf_config, "Run config (JSON) supplying inference defaults");
  inf->add_option("--sample-rate", inf_rate, "Observed fraction of patches");
  inf->add_option("--steps", inf_steps, "Euler steps K");
  inf->add_option("--seed", inf_seed, "Sampling seed");
  inf->add_option("--split", inf_split, "Dataset split");
  inf->add_option("--subset", inf_subset, "Dataset subset");
  inf->add_option("--max-samples", inf_max, "Limit the number of samples");
  inf->add_option("--sample", inf_samples, "Explicit sample ids");

  // eval
  auto* ev = cli.add_subcommand("eval", "Compute NMSE, RMSE, PSNR and SSIM");
  std::string ev_pred, ev_truth, ev_out, ev_data, ev_label = "eval";
  std::optional<double> ev_range;
  ev->add_option("--pred", ev_pred, "Predicted volume (.f32) or directory of volumes")->required();
  ev->add_option("--truth", ev_truth, "Ground-truth volume (.f32)");
  ev->add_option("--data", ev_data, "Dataset directory, when --pred is a directory");
  ev->add_option("--out", ev_out, "Report JSON")->required();
  ev->add_option("--range", ev_range, "Dynamic range r in dB");
  ev->add_option("--label", ev_label, "Label stored in the report");

  // baseline kriging
  auto* base = cli.add_subcommand("baseline", "Classical baselines");
  base->require_subcommand(1);
  auto* krig = base->add_subcommand("kriging", "Ordinary kriging from sparse observations");
  std::string kr_data, kr_out, kr_config;
  std::optional<double> kr_rate;
  std::optional<std::uint64_t> kr_seed;
  std::optional<std::string> kr_split;
  std::size_t kr_max = 0;
  int kr_threads = 0;
  krig->add_option("--data", kr_data, "Dataset directory (default $FARM_DATA_DIR)");
  krig->add_option("--out", kr_out, "Output directory")->required();
  krig->add_option("--config", kr_config, "Run config (JSON)");
  krig->add_option("--sample-rate", kr_rate, "Observed fraction of patches");
  krig->add_option("--seed", kr_seed, "Observation seed");
  krig->add_option("--split", kr_split, "Dataset split");
  krig->add_option("--max-samples", kr_max, "Limit the number of samples");
  krig->add_option("--threads", kr_threads, "Worker threads");

  // report
  auto* rep = cli.add_subcommand("report", "Summary tables and per-height charts from metrics documents");
  std::string rep_runs, rep_plots;
  rep->add_option("--runs", rep_runs, "Directory searched for metrics JSON")->required();
  rep->add_option("--plots", rep_plots, "Output directory")->required();

  // run
  auto* run = cli.add_subcommand("run", "Run the configured pipeline stages in order");
  std::string run_config, run_out;
  std::vector<std::string> run_stages;
  bool run_force = false;
  run->add_option("--config", run_config, "Run config (JSON)")->required();
  run->add_option("--out", run_out, "Run directory (overrides output_dir)");
  run->add_option("--stages", run_stages, "Subset of stages")->delimiter(',');
  run->add_flag("--force", run_force, "Re-run stages even when up to date");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) {
      std::uint64_t seed = 0;
      auto config = dataset_config(gen_config, &seed);
      if (*gen_seed_opt) seed = gen_seed;
      print(app::cmd_gen(config, gen_out, seed, gen_jobs));
    } else if (*pretrain || *finetune) {
      const bool is_ft = finetune->parsed();
      const TrainFlags& f = is_ft ? ft : pt;
      auto rc = config_or_default(f.config);
      app::TrainOptions o;
      o.data = app::resolve_data_dir(f.data);
      o.out = f.out;
      o.model = rc.model;
      o.train = is_ft ? rc.finetune : rc.pretrain;
      if (f.seed) o.train.seed = *f.seed;
      if (f.steps) o.train.max_steps = *f.steps;
      if (f.batch) o.train.batch_size = *f.batch;
      if (f.lr) o.train.lr = *f.lr;
      if (f.threads > 0) o.train.threads = f.threads;
      o.train.validate();
      if (is_ft) o.init = fs::path(f.ckpt);
      o.log = f.log;
      o.config_hash = rc.hash();
      o.progress = &std::cerr;
      print(app::cmd_train(o));
    } else if (*inf) {
      auto rc = config_or_default(inf_config);
      app::InferOptions o;
      o.ckpt = inf_ckpt;
      o.data = app::resolve_data_dir(inf_data);
      o.out = inf_out;
      o.mode = infer::parse_mode(inf_mode);
      o.inference = rc.inference;
      if (inf_rate) o.inference.sample_rate = *inf_rate;
      if (inf_steps) o.inference.steps = *inf_steps;
      if (inf_seed) o.inference.seed = *inf_seed;
      if (inf_split) o.inference.split = *inf_split;
      if (inf_subset) o.inference.subset = *inf_subset;
      if (inf_max) o.inference.max_samples = inf_max;
      if (o.inference.steps < 1) throw ConfigError("--steps must be >= 1");
      if (!(o.inference.sample_rate > 0.0 && o.inference.sample_rate <= 1.0)) {
        throw ConfigError("--sample-rate must lie in (0, 1]");
      }
      o.sample_ids = inf_samples;
      o.config_hash = rc.hash();
      print(app::cmd_infer(o));
    } else if (*ev) {
      if (fs::is_directory(ev_pred)) {
        print(app::cmd_eval_dir(ev_pred, app::resolve_data_dir(ev_data), ev_out, ev_label, ""));
      } else {
        if (ev_truth.empty()) throw ConfigError("--truth is required when --pred is a file");
        print(eval::to_json(app::cmd_eval_files(ev_pred, ev_truth, ev_range, ev_out)));
      }
    } else if (*krig) {
      auto rc = config_or_default(kr_config);
      app::KrigingOptionsCli o;
      o.data = app::resolve_data_dir(kr_data);
      o.out = kr_out;
      o.inference = rc.inference;
      if (kr_rate) o.inference.sample_rate = *kr_rate;
      if (kr_seed) o.inference.seed = *kr_seed;
      if (kr_split) o.inference.split = *kr_split;
      if (kr_max) o.inference.max_samples = kr_max;
      if (!(o.inference.sample_rate > 0.0 && o.inference.sample_rate <= 1.0)) {
        throw ConfigError("--sample-rate must lie in (0, 1]");
      }
      o.baseline = rc.baseline;
      o.model = rc.model;
      o.config_hash = rc.hash();
      o.threads = kr_threads;
      print(app::cmd_baseline_kriging(o));
    } else if (*rep) {
      print(app::write_report(app::collect_reports(rep_runs), rep_plots));
    } else if (*run) {
      auto rc = app::load_run_config(run_config);
      if (!run_stages.empty()) {
        for (const auto& s : run_stages) {
          if (std::find(app::kStageOrder.begin(), app::kStageOrder.end(), s) == app::kStageOrder.end()) {
            throw ConfigError("unknown stage '" + s + "'");
          }
        }
        rc.stages = run_stages;
      }
      const auto outcomes = app::run_pipeline(rc, run_out, run_force, std::cerr);
      nlohmann::json j = nlohmann::json::array();
      for (const auto& o : outcomes) j.push_back({{"stage", o.stage}, {"skipped", o.skipped}, {"seconds", o.seconds}});
      print(j);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const app::StageFailure& e) {
    std::cerr << e.what() << '\n';
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  }
  return 0;
}
