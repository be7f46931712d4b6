#include "farm/train/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "farm/core/io.hpp"
#include "farm/core/rng.hpp"
#include "farm/train/loss.hpp"

namespace farm::train {

std::string to_string(Stage stage) { return stage == Stage::Pretrain ? "pretrain" : "finetune"; }

Stage parse_stage(const std::string& text) {
  if (text == "pretrain") return Stage::Pretrain;
  if (text == "finetune") return Stage::Finetune;
  throw ConfigError("unknown training stage '" + text + "' (expected pretrain or finetune)");
}

TrainConfig TrainConfig::pretrain_defaults() { return {}; }

TrainConfig TrainConfig::finetune_defaults() {
  TrainConfig c;
  c.stage = Stage::Finetune;
  c.epochs = 20;
  c.lr = 1e-4;
  c.warmup_epochs = 0.0;
  return c;
}

void TrainConfig::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("train.") + name + " must lie in [0, 1]");
  };
  unit(p_mask, "p_mask");
  unit(p_m, "p_m");
  unit(p_mask_based, "p_mask_based");
  unit(p_mask_free, "p_mask_free");
  if (lambda_free < 0.0 || lambda_based < 0.0) throw ConfigError("train.lambda_* must be non-negative");
  if (epochs < 1 && max_steps <= 0) throw ConfigError("train.epochs must be >= 1 unless max_steps is set");
  if (max_steps < 0) throw ConfigError("train.max_steps must be non-negative");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (warmup_epochs < 0.0) throw ConfigError("train.warmup_epochs must be non-negative");
  if (weight_decay < 0.0) throw ConfigError("train.weight_decay must be non-negative");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("train.delta must lie in (0, 1)");
  if (threads < 0) throw ConfigError("train.threads must be non-negative");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"stage", to_string(c.stage)},
          {"p_mask", c.p_mask},
          {"p_m", c.p_m},
          {"lambda_free", c.lambda_free},
          {"lambda_based", c.lambda_based},
          {"p_mask_based", c.p_mask_based},
          {"p_mask_free", c.p_mask_free},
          {"epochs", c.epochs},
          {"max_steps", c.max_steps},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"warmup_epochs", c.warmup_epochs},
          {"weight_decay", c.weight_decay},
          {"grad_clip", c.grad_clip},
          {"delta", c.delta},
          {"seed", c.seed},
          {"threads", c.threads}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  io::reject_unknown_keys(j,
                          {"stage", "p_mask", "p_m", "lambda_free", "lambda_based", "p_mask_based", "p_mask_free",
                           "epochs", "max_steps", "batch_size", "lr", "warmup_epochs", "weight_decay", "grad_clip",
                           "delta", "seed", "threads"},
                          "train");
  try {
    if (j.contains("stage")) c.stage = parse_stage(j.at("stage").get<std::string>());
    c.p_mask = j.value("p_mask", c.p_mask);
    c.p_m = j.value("p_m", c.p_m);
    c.lambda_free = j.value("lambda_free", c.lambda_free);
    c.lambda_based = j.value("lambda_based", c.lambda_based);
    c.p_mask_based = j.value("p_mask_based", c.p_mask_based);
    c.p_mask_free = j.value("p_mask_free", c.p_mask_free);
    c.epochs = j.value("epochs", c.epochs);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr = j.value("lr", c.lr);
    c.warmup_epochs = j.value("warmup_epochs", c.warmup_epochs);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.grad_clip = j.value("grad_clip", c.grad_clip);
    c.delta = j.value("delta", c.delta);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<TrainingExample> prepare_examples(const std::vector<const synth::DatasetSample*>& samples,
                                              const NormRange& norm) {
  std::vector<TrainingExample> out;
  out.reserve(samples.size());
  for (const auto* s : samples) {
    const auto& spec = s->volume.spec();
    out.push_back({s->id, normalize(s->volume, norm), cond::build_condition_grids(*s->buildings, s->bs, norm),
                   cond::null_condition_grids(spec)});
  }
  return out;
}

std::vector<SampleDraw> draw_step(const TrainConfig& config, long step, std::size_t batch_size) {
  const bool finetune = config.stage == Stage::Finetune;
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(step)));
  std::vector<SampleDraw> draws(batch_size * (finetune ? 2 : 1));
  for (auto& d : draws) {
    d.t = rng.uniform(0.0, 1.0 - config.delta);
    d.mask_seed = rng.engine()();
    d.noise_seed = rng.engine()();
    d.drop = !finetune && rng.bernoulli(config.p_m);
  }
  return draws;
}

const cond::ConditionGrids& pretrain_grids(const TrainingExample& example, const SampleDraw& draw) {
  return draw.drop ? example.null_grids : example.grids;
}

ForwardResult masked_flow_forward(const model::FarmModel& model, const PatchPlan& plan, const Field& r_unit,
                                  const cond::ConditionGrids& grids, double p_mask, const SampleDraw& draw,
                                  double weight, double delta) {
  const cond::PatchMask mask = cond::sample_mask(plan.count(), p_mask, draw.mask_seed);
  const Field eps = cond::gaussian_field(plan.spec(), draw.noise_seed);
  const cond::ConditionedInput input = cond::assemble_input(r_unit, grids, mask, plan, draw.t, eps);

  ForwardResult result{0.0, std::make_unique<nn::Tape>()};
  const nn::Var pred = model.forward(*result.tape, input, plan);
  const nn::Matrix r = model::field_patches(r_unit, plan);
  const nn::Matrix z = model::field_patches(input.channels[cond::kRadio], plan);
  const nn::Matrix e = model::field_patches(eps, plan);
  const nn::Var loss = velocity_loss(pred, r, z, e, draw.t, mask.masked_ids, delta);
  result.loss = loss.value()(0, 0);
  if (std::isfinite(result.loss)) result.tape->backward(loss, weight, false);
  return result;
}

nlohmann::json to_json(const StepRecord& r) {
  nlohmann::json j{{"step", r.step},     {"stage", to_string(r.stage)}, {"loss", r.loss},
                   {"lr", r.lr},         {"grad_norm", r.grad_norm},    {"t_mean", r.t_mean},
                   {"t_min", r.t_min},   {"t_max", r.t_max},            {"dropped", r.dropped},
                   {"seed", r.seed},     {"mask_seeds", r.mask_seeds},  {"samples", r.sample_ids}};
  if (r.stage == Stage::Finetune) {
    j["loss_free"] = r.loss_free;
    j["loss_based"] = r.loss_based;
  }
  return j;
}

namespace {

/// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace

Trainer::Trainer(model::FarmModel& model, TrainConfig config, const VoxelGridSpec& grid)
    : model_(model),
      config_(config),
      plan_(grid, model.config().patch),
      optimizer_(nn::AdamWOptions{0.9, 0.999, 1e-8, config.weight_decay}) {
  config_.validate();
  model_.params().set_frozen("", false);
  if (config_.stage == Stage::Finetune) model_.params().set_frozen("enc.", true);
}

long Trainer::total_steps(std::size_t n) const {
  if (config_.max_steps > 0) return config_.max_steps;
  const long per_epoch = static_cast<long>((n + config_.batch_size - 1) / config_.batch_size);
  return per_epoch * config_.epochs;
}

long Trainer::warmup_steps(std::size_t n) const {
  const double frac = config_.epochs > 0 ? config_.warmup_epochs / config_.epochs : 0.0;
  return std::min(total_steps(n), static_cast<long>(std::llround(frac * static_cast<double>(total_steps(n)))));
}

StepRecord Trainer::step(std::span<const TrainingExample* const> batch, double lr) {
  require(!batch.empty(), "training step needs a non-empty batch");
  const double delta = config_.delta;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const bool finetune = config_.stage == Stage::Finetune;

  StepRecord rec;
  rec.step = step_;
  rec.stage = config_.stage;
  rec.lr = lr;
  rec.seed = derive_seed(config_.seed, static_cast<std::uint64_t>(step_));

  const std::size_t branches = finetune ? 2 : 1;
  const std::vector<SampleDraw> draws = draw_step(config_, step_, batch.size());

  std::vector<ForwardResult> results(draws.size());
  parallel_for(draws.size(), resolve_threads(config_.threads), [&](std::size_t k) {
    const TrainingExample& ex = *batch[k / branches];
    const SampleDraw& d = draws[k];
    if (!finetune) {
      results[k] = masked_flow_forward(model_, plan_, ex.r_unit, pretrain_grids(ex, d), config_.p_mask,
                                       d, inv_b, delta);
    } else if (k % branches == 0) {
      results[k] = masked_flow_forward(model_, plan_, ex.r_unit, ex.grids, config_.p_mask_based, d,
                                       config_.lambda_based * inv_b, delta);
    } else {
      results[k] = masked_flow_forward(model_, plan_, ex.r_unit, ex.null_grids, config_.p_mask_free, d,
                                       config_.lambda_free * inv_b, delta);
    }
  });

  rec.t_min = 1.0;
  for (std::size_t k = 0; k < draws.size(); ++k) {
    const double l = results[k].loss;
    if (!finetune) {
      rec.loss += l * inv_b;
    } else if (k % branches == 0) {
      rec.loss_based += l * inv_b;
    } else {
      rec.loss_free += l * inv_b;
    }
    rec.t_mean += draws[k].t / static_cast<double>(draws.size());
    rec.t_min = std::min(rec.t_min, draws[k].t);
    rec.t_max = std::max(rec.t_max, draws[k].t);
    rec.dropped += draws[k].drop ? 1 : 0;
    rec.mask_seeds.push_back(draws[k].mask_seed);
  }
  for (const auto* ex : batch) rec.sample_ids.push_back(ex->id);
  if (finetune) rec.loss = config_.lambda_free * rec.loss_free + config_.lambda_based * rec.loss_based;

  if (!std::isfinite(rec.loss)) {
    std::ostringstream msg;
    msg << to_string(config_.stage) << " step " << step_ << ": non-finite loss (" << rec.loss << ")";
    for (std::size_t k = 0; k < draws.size(); ++k) {
      msg << "; " << batch[k / branches]->id << " t=" << draws[k].t << " loss=" << results[k].loss;
    }
    throw NumericalError(msg.str());
  }

  auto& params = model_.params();
  params.zero_grad();
  for (auto& r : results) r.tape->flush_parameter_grads();
  const auto all = params.all();
  rec.grad_norm = nn::clip_grad_norm(all, config_.grad_clip);
  if (!std::isfinite(rec.grad_norm)) {
    throw NumericalError(to_string(config_.stage) + " step " + std::to_string(step_) + ": non-finite gradient norm");
  }
  optimizer_.step(all, lr);
  ++step_;
  return rec;
}

std::vector<StepRecord> Trainer::fit(const std::vector<TrainingExample>& data,
                                     const std::function<void(const StepRecord&)>& on_step) {
  require(!data.empty(), "training needs at least one example");
  const std::size_t n = data.size();
  const std::size_t b = std::min<std::size_t>(n, static_cast<std::size_t>(config_.batch_size));
  const long per_epoch = static_cast<long>((n + b - 1) / b);
  const long total = total_steps(n);
  const long warmup = warmup_steps(n);

  std::vector<StepRecord> records;
  std::vector<const TrainingExample*> order;
  long epoch = -1;
  while (step_ < total) {
    const long e = step_ / per_epoch;
    if (e != epoch) {
      epoch = e;
      order.clear();
      for (const auto& ex : data) order.push_back(&ex);
      Rng shuffle(derive_seed(config_.seed ^ 0x9e3779b97f4a7c15ULL, static_cast<std::uint64_t>(epoch)));
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.engine()() % i]);
    }
    const std::size_t start = static_cast<std::size_t>(step_ % per_epoch) * b;
    const std::size_t count = std::min(b, n - start);
    const double lr = nn::warmup_cosine_lr(step_, warmup, total, config_.lr);
    records.push_back(step(std::span<const TrainingExample* const>(order.data() + start, count), lr));
    if (on_step) on_step(records.back());
  }
  return records;
}

}  // namespace farm::train
