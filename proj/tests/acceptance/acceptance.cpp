// Prints one PASS/FAIL line per acceptance criterion. `--only 3,9` runs a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "farm/app/config.hpp"
#include "farm/app/pipeline.hpp"
#include "farm/app/report.hpp"
#include "farm/cond/conditioning.hpp"
#include "farm/cond/flow.hpp"
#include "farm/cond/mask.hpp"
#include "farm/core/io.hpp"
#include "farm/core/rng.hpp"
#include "farm/eval/kriging.hpp"
#include "farm/eval/metrics.hpp"
#include "farm/infer/sampler.hpp"
#include "farm/model/attention_trace.hpp"
#include "farm/model/farm_model.hpp"
#include "farm/nn/ops.hpp"
#include "farm/synth/propagation.hpp"
#include "farm/synth/scene.hpp"
#include "farm/train/loss.hpp"
#include "farm/train/trainer.hpp"

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace farm;
using nn::Matrix;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Matrix randn(nn::Index r, nn::Index c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (nn::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

nn::Var project(nn::Tape& t, const nn::Var& y, std::uint64_t seed) {
  return nn::sum(nn::mul(y, t.constant(randn(y.rows(), y.cols(), seed))));
}

std::vector<VoxelCoord> random_coords(int n, std::uint64_t seed, int extent = 8) {
  Rng rng(seed);
  std::vector<VoxelCoord> c;
  for (int i = 0; i < n; ++i)
    c.push_back({rng.uniform_int(0, extent - 1), rng.uniform_int(0, extent - 1), rng.uniform_int(0, 3)});
  return c;
}

VoxelCoord random_voxel(const VoxelGridSpec& s, std::mt19937_64& gen) {
  return {static_cast<int>(gen() % s.L), static_cast<int>(gen() % s.W), static_cast<int>(gen() % s.H)};
}

fs::path scratch(const std::string& name) {
  const char* keep = std::getenv("FARM_ACCEPTANCE_DIR");
  const fs::path root = keep ? fs::path(keep) : fs::temp_directory_path() / "farm_acceptance";
  const fs::path p = root / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

app::RunConfig repo_config(const std::string& name) { return app::load_run_config(fs::path(FARM_SOURCE_DIR) / "configs" / name); }

// 1
Outcome flow_identities() {
  const auto start = std::chrono::steady_clock::now();
  const auto s = testing::grid(8, 8, 4);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> ut(0.0, 1.0 - cond::kFlowDelta);
  double interp = 0.0, vel = 0.0, loss = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto r = testing::random_field(s, 10 + k), eps = testing::random_field(s, 500 + k, -3.0, 3.0);
    const double t = ut(gen);
    const auto st = cond::flow_interpolate(r, eps, t);
    for (std::size_t i = 0; i < r.size(); ++i) {
      interp = std::max(interp, std::abs(st.z[i] - (t * r[i] + (1 - t) * eps[i])));
      vel = std::max(vel, std::abs(st.velocity[i] - (r[i] - eps[i])));
    }
    const Matrix rm = Eigen::Map<const Matrix>(r.data().data(), 32, 4);
    const Matrix em = Eigen::Map<const Matrix>(eps.data().data(), 32, 4);
    const Matrix zm = Eigen::Map<const Matrix>(st.z.data().data(), 32, 4);
    loss = std::max(loss, train::velocity_loss(rm, rm, zm, em, t));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {interp < 1e-6 && vel < 1e-6 && loss < 1e-10 && secs < 1.0,
          "interp " + fmt("%.1e", interp) + ", velocity " + fmt("%.1e", vel) + ", loss(R) " + fmt("%.1e", loss) +
              " (< 1e-6, 1e-6, 1e-10), " + fmt("%.3f s", secs) + " (< 1 s)"};
}

class TruthDenoiser : public infer::Denoiser {
 public:
  explicit TruthDenoiser(Field truth) : truth_(std::move(truth)) {}
  Field predict_clean(const cond::ConditionedInput&, const PatchPlan&) const override { return truth_; }

 private:
  Field truth_;
};

// 2
Outcome oracle_ode() {
  const auto start = std::chrono::steady_clock::now();
  const PatchPlan plan(testing::micro_grid(), {4, 4, 2});
  const auto norm = testing::micro_norm();
  const auto ex = testing::micro_examples(1, 3)[0];
  const ArmVolume truth = denormalize(ex.r_unit, norm);
  const auto obs = infer::sample_observations(truth, plan, 0.25, 7);
  TruthDenoiser oracle(ex.r_unit);
  double worst = 0.0;
  for (auto mode : {infer::Mode::ConditionFree, infer::Mode::ConditionOnly, infer::Mode::Hybrid}) {
    for (int k : {1, 2, 8}) {
      infer::InferenceRequest req{mode, k, 9, {}, {}};
      if (mode != infer::Mode::ConditionOnly) req.observations = obs;
      if (mode != infer::Mode::ConditionFree) req.grids = ex.grids;
      const auto out = infer::sample(oracle, req, plan, norm);
      for (std::size_t i = 0; i < truth.values.size(); ++i)
        worst = std::max(worst, std::abs(out.volume.values[i] - truth.values[i]) / std::abs(truth.values[i]));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst < 1e-5 && secs < 10.0,
          "max relative error " + fmt("%.1e", worst) + " over K in {1,2,8} x 3 modes (< 1e-5), " + fmt("%.2f s", secs)};
}

// 3
Outcome gradient_checks() {
  const auto start = std::chrono::steady_clock::now();
  const PatchShape patch{2, 2, 1};
  const auto coords = random_coords(6, 3);
  const Matrix patches = randn(6, 16, 5);

  nn::ParameterSet pe;
  Rng re(1);
  model::RadioEncoder enc(pe, {1, 12, 2, 2, true, true}, patch, re);
  const double enc_err = testing::gradcheck_sampled(
      pe, [&](nn::Tape& t) { return project(t, enc.forward(t, patches, coords), 7); }, 50, 101);

  nn::ParameterSet pd;
  Rng rd(2);
  model::DecoderConfig dc;
  dc.depth = 1;
  dc.width = 12;
  dc.heads = 2;
  dc.mlp_ratio = 2;
  model::MapDecoder dec(pd, dc, patch, 18, rd);
  // Nonzero gates so every block parameter receives gradient.
  Rng rm(3);
  for (auto* p : pd.with_prefix("dec.blocks.0.modulation"))
    for (nn::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] = rm.normal(0.0, 0.3);
  const Matrix enc_tokens = randn(2, 18, 14), noisy = randn(4, 16, 15);
  const double dec_err = testing::gradcheck_sampled(
      pd,
      [&](nn::Tape& t) {
        const auto full = nn::concat_rows({dec.align_encoder(t, t.constant(enc_tokens)), dec.embed_noisy(t, noisy)});
        return project(t, dec.decode(t, full, 0.35, coords), 3);
      },
      50, 202);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {enc_err < 1e-3 && dec_err < 1e-3 && secs < 120.0,
          "encoder " + fmt("%.1e", enc_err) + ", decoder " + fmt("%.1e", dec_err) +
              " on 50 random parameters each (< 1e-3), " + fmt("%.2f s", secs)};
}

// 4
Outcome rope_properties() {
  const auto split = model::axis_split(24);
  const auto coords = random_coords(10, 2, 32);
  const Matrix q = randn(10, 24, 4);
  const Matrix rq = model::rope_rotate(q, model::rope_tables(coords, split));
  double norm_err = 0.0;
  for (nn::Index i = 0; i < 10; ++i)
    for (nn::Index j = 0; j < 24; j += 2)
      norm_err = std::max(norm_err, std::abs(rq.row(i).segment(j, 2).norm() - q.row(i).segment(j, 2).norm()));

  nn::ParameterSet ps;
  Rng rng(4);
  model::RadioEncoder enc(ps, {2, 24, 4, 2, false, true}, {2, 2, 1}, rng);
  const Matrix patches = randn(10, 16, 5);
  std::vector<VoxelCoord> shifted;
  for (auto c : coords) shifted.push_back({c[0] + 17, c[1] - 5, c[2] + 3});
  model::AttentionTrace ta, tb;
  nn::Tape t(false);
  enc.forward(t, patches, coords, &ta);
  enc.forward(t, patches, shifted, &tb);
  double shift_err = 0.0;
  for (std::size_t b = 0; b < ta.logits.size(); ++b)
    for (std::size_t h = 0; h < ta.logits[b].size(); ++h)
      shift_err = std::max(shift_err, (ta.logits[b][h] - tb.logits[b][h]).cwiseAbs().maxCoeff());
  return {norm_err < 1e-6 && shift_err < 1e-5 && !ta.logits.empty(),
          "pair norm " + fmt("%.1e", norm_err) + " (< 1e-6), logit change under translation " + fmt("%.1e", shift_err) +
              " (< 1e-5)"};
}

// 5
Outcome mask_accounting() {
  std::mt19937_64 gen(8);
  int bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + static_cast<int>(gen() % 300);
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    const auto m = cond::sample_mask(n, p, gen());
    std::vector<int> all = m.masked_ids;
    all.insert(all.end(), m.visible_ids.begin(), m.visible_ids.end());
    std::sort(all.begin(), all.end());
    std::vector<int> want(static_cast<std::size_t>(n));
    std::iota(want.begin(), want.end(), 0);
    if (m.masked_ids.size() != static_cast<std::size_t>(std::floor(p * n)) || all != want) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " of 1000 draws violate |masked| = floor(p N) or the partition"};
}

// 6
Outcome condition_grids() {
  std::mt19937_64 gen(6);
  const double hand = oracle::fspl_db(100.0, 2.1e9, synth::kFreeSpaceConstantDb);
  double fspl_err = std::abs(synth::fspl_db(100.0, 2.1e9) - hand);
  bool one_hot = true;
  const NormRange norm{-160.0, -20.0};
  for (auto type : {AntennaType::Iso, AntennaType::Dir30, AntennaType::Dir60, AntennaType::Dir120}) {
    auto scene = synth::generate_scene(60 + static_cast<int>(type), testing::grid(24, 24, 8), 6);
    scene.bs.antenna = type;
    const auto g = cond::build_condition_grids(scene.buildings, scene.bs, norm);
    double ones = 0.0, total = 0.0;
    for (double v : g.position.data()) {
      ones += v == 1.0;
      total += v;
    }
    one_hot = one_hot && ones == 1.0 && total == 1.0 && g.position(scene.bs.p_tx[0], scene.bs.p_tx[1], scene.bs.p_tx[2]) == 1.0;
    for (int i = 0; i < 10; ++i) {
      const auto v = random_voxel(g.position.spec(), gen);
      double d = 0.0;
      for (int a = 0; a < 3; ++a) d += std::pow((v[a] - scene.bs.p_tx[a]) * 4.0, 2);
      d = d > 0.0 ? std::sqrt(d) : 2.0;
      const double want = oracle::fspl_db(d, scene.bs.carrier_hz, -147.55) - oracle::gain_toward(scene.bs, v);
      fspl_err = std::max(fspl_err, std::abs(g.free_space_loss_db(v[0], v[1], v[2]) - want));
      fspl_err = std::max(fspl_err, std::abs(g.free_space(v[0], v[1], v[2]) -
                                             norm.normalize(scene.bs.tx_power_dbm - want)));
    }
  }
  train::TrainConfig c;
  c.p_m = 0.2;
  c.seed = 3;
  int drops = 0, draws = 0;
  for (long step = 0; draws < 10000; ++step) {
    for (const auto& d : train::draw_step(c, step, 10)) {
      drops += d.drop;
      ++draws;
    }
  }
  const double rate = static_cast<double>(drops) / draws;
  return {one_hot && fspl_err < 1e-6 && std::abs(hand - 78.89) < 5e-3 && std::abs(rate - 0.2) <= 0.02,
          std::string("one-hot ") + (one_hot ? "yes" : "no") + ", hand case " + fmt("%.4f dB", hand) +
              ", fspl error " + fmt("%.1e", fspl_err) + " (< 1e-6), drop rate " + fmt("%.4f", rate) +
              " over 10k draws (0.2 +- 0.02)"};
}

// 7
Outcome propagation_oracle() {
  synth::PropagationParams params;
  std::mt19937_64 gen(21);
  double worst = 0.0;
  for (auto type : {AntennaType::Iso, AntennaType::Dir30, AntennaType::Dir60, AntennaType::Dir120}) {
    auto scene = synth::generate_scene(40 + static_cast<int>(type), testing::grid(32, 32, 8), 12);
    scene.bs.antenna = type;
    const auto vol = synth::render_arm(scene.buildings, scene.bs, params);
    for (int i = 0; i < 10; ++i) {
      const auto v = random_voxel(vol.spec(), gen);
      const double want = oracle::rss_dbm(scene.buildings, scene.bs, params.building_loss_db_per_m, -147.55, v);
      worst = std::max(worst, std::abs(vol.values(v[0], v[1], v[2]) - want));
    }
  }
  // Two-voxel slab between the transmitter and the receiver.
  const auto s = testing::grid(12, 3, 3, 4.0);
  BuildingGrid open{VoxelArray<std::uint8_t>(s, 0)};
  BuildingGrid slab = open;
  for (int w = 0; w < 3; ++w)
    for (int h = 0; h < 3; ++h) slab.occupancy(4, w, h) = slab.occupancy(5, w, h) = 1;
  const BsConfig bs{{0, 1, 1}, 30.0, 3.5e9, AntennaType::Iso, 0.0, 0.0};
  const double extra = synth::render_arm(open, bs, params).values(10, 1, 1) - synth::render_arm(slab, bs, params).values(10, 1, 1);
  const double want = params.building_loss_db_per_m * 2.0 * s.delta;
  return {worst < 1e-6 && std::abs(extra - want) < 1e-9,
          "max deviation " + fmt("%.1e dB", worst) + " at 40 voxels (< 1e-6), slab loss " + fmt("%.6f", extra) +
              " dB vs alpha_b*2*delta = " + fmt("%.6f", want)};
}

// 8
Outcome adaln_identity() {
  const auto cfg = model::ModelConfig::profile("tiny");
  nn::ParameterSet ps;
  Rng rng(5);
  model::MapDecoder dec(ps, cfg.decoder, cfg.patch, cfg.encoder.width, rng);
  const auto coords = random_coords(16, 4);
  const Matrix tokens = randn(16, cfg.decoder.width, 6);
  double worst = 0.0;
  for (double t : {0.0, 0.37, 0.999}) {
    nn::Tape tape(false);
    worst = std::max(worst, (dec.blocks(tape, tape.constant(tokens), t, coords).value() - tokens).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-6, "untrained " + std::to_string(cfg.decoder.depth) + "-block stack deviates by " +
                            fmt("%.1e", worst) + " (< 1e-6)"};
}

// 9
Outcome overfit_target() {
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = repo_config("overfit.json");
  const auto out = scratch("overfit");
  std::ostringstream log;
  app::run_pipeline(cfg, out, true, log);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double cond_db = io::read_json(out / "metrics" / "condition_only.json").at("average").at("nmse_db");
  const double free_db = io::read_json(out / "metrics" / "condition_free.json").at("average").at("nmse_db");
  return {cond_db <= -15.0 && free_db <= -15.0 && secs <= 1200.0,
          "condition-only " + fmt("%.2f dB", cond_db) + ", condition-free " + fmt("%.2f dB", free_db) +
              " (<= -15 dB), " + fmt("%.0f s", secs) + " (<= 1200 s)"};
}

// 10
Outcome kriging_properties() {
  const auto s = testing::grid(16, 16, 4);
  const NormRange norm{-150.0, -30.0};
  Rng rng(7);
  SparseObservation obs;
  for (std::size_t i = 0; i < s.voxel_count(); i += 13) {
    obs.indices.push_back(i);
    obs.values.push_back(rng.normal(-80.0, 10.0));
  }
  eval::KrigingOptions exact;
  exact.nugget = 0.0;
  const auto fit = eval::kriging_predict(obs, s, norm, exact);
  double interp = 0.0;
  for (std::size_t k = 0; k < obs.size(); ++k)
    interp = std::max(interp, std::abs(fit.volume.values[obs.indices[k]] - obs.values[k]));

  SparseObservation flat = obs;
  std::fill(flat.values.begin(), flat.values.end(), -77.0);
  double constant = 0.0;
  const auto flat_fit = eval::kriging_predict(flat, s, norm);
  for (double v : flat_fit.volume.values.data()) constant = std::max(constant, std::abs(v + 77.0));

  std::vector<eval::Point3> pts;
  std::vector<double> vals;
  for (int i = 0; i < 40; ++i) {
    pts.push_back({rng.uniform(0, 60), rng.uniform(0, 60), rng.uniform(0, 16)});
    vals.push_back(rng.normal(-70.0, 8.0));
  }
  const eval::OrdinaryKriging ok(pts, vals, {0.3, 4.0, 15.0});
  double sum_err = ok.singular() ? 1.0 : 0.0;
  for (int q = 0; q < 100; ++q) {
    const auto w = ok.weights({rng.uniform(0, 60), rng.uniform(0, 60), rng.uniform(0, 16)});
    sum_err = std::max(sum_err, w ? std::abs(w->sum() - 1.0) : 1.0);
  }
  return {interp < 1e-6 && constant < 1e-6 && sum_err < 1e-9,
          "sample reproduction " + fmt("%.1e", interp) + " (< 1e-6), constant field " + fmt("%.1e", constant) +
              " (< 1e-6), weight sum " + fmt("%.1e", sum_err) + " (< 1e-9)"};
}

// 11
Outcome metric_oracles() {
  const auto s = testing::grid(16, 16, 4);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto a = testing::random_field(s, 10 + k, -120.0, -30.0), b = testing::random_field(s, 50 + k, -120.0, -30.0);
    const double r = 90.0, m = oracle::mse(a.data(), b.data());
    worst = std::max({worst, std::abs(eval::mse(a, b) - m), std::abs(eval::rmse(a, b) - std::sqrt(m)),
                      std::abs(eval::nmse(a, b).ratio - oracle::nmse_ratio(a.data(), b.data())),
                      std::abs(eval::psnr(eval::mse(a, b), r) - oracle::psnr_db(m, r)),
                      std::abs(eval::ssim(a, b, r) - oracle::ssim(a, b, r, 8, 8, 4, 4, 4, 2))});
  }
  Field truth = testing::random_field(s, 3, -100.0, -40.0), half = truth;
  for (double& v : half.data()) v *= 0.5;
  const double ratio_db = eval::nmse(truth, half).db;
  const double p = eval::psnr(1.0, 100.0);
  return {worst < 1e-9 && std::abs(ratio_db + 6.0206) < 1e-4 && std::abs(p - 40.0) < 1e-12,
          "max deviation " + fmt("%.1e", worst) + " on 20 pairs (< 1e-9), ratio 0.25 -> " + fmt("%.4f dB", ratio_db) +
              ", r=100 MSE=1 -> " + fmt("%.4f dB", p)};
}

// 12
Outcome determinism() {
  json j = json::parse(R"({
    "name": "determinism", "seed": 5,
    "dataset": {"grid": {"L": 32, "W": 32, "H": 8, "delta": 4.0},
                "subsets": [{"name": "d", "frequencies_ghz": [2.1, 3.5], "scenes": 3, "tx_per_scene": 2}]},
    "model": {"profile": "tiny", "patch": [8, 8, 2]},
    "pretrain": {"max_steps": 10, "batch_size": 2},
    "stages": ["gen", "pretrain"]})");
  std::vector<std::string> hashes;
  std::vector<std::vector<double>> losses;
  for (int run = 0; run < 2; ++run) {
    j["threads"] = run + 1;
    const auto out = scratch("determinism_" + std::to_string(run));
    std::ostringstream log;
    app::run_pipeline(app::run_config_from_json(j), out, true, log);
    hashes.push_back(io::read_json(out / "data" / "manifest.json").at("content_hash"));
    std::ifstream in(out / "logs" / "pretrain.ndjson");
    std::vector<double> l;
    for (std::string line; std::getline(in, line) && l.size() < 10;) l.push_back(json::parse(line).at("loss"));
    losses.push_back(l);
  }
  double worst = losses[0].size() == 10 && losses[1].size() == 10 ? 0.0 : 1e300;
  for (std::size_t i = 0; i < std::min(losses[0].size(), losses[1].size()); ++i)
    worst = std::max(worst, std::abs(losses[0][i] - losses[1][i]));
  return {hashes[0] == hashes[1] && worst <= 1e-6,
          std::string("dataset hash ") + (hashes[0] == hashes[1] ? "identical" : "differs") +
              ", first-10 loss gap " + fmt("%.1e", worst) + " (<= 1e-6)"};
}

// 13
Outcome zero_shot_report() {
  const auto cfg = repo_config("zero_shot.json");
  const auto out = scratch("zero_shot");
  std::ostringstream log;
  app::run_pipeline(cfg, out, true, log);
  const auto reports = app::collect_reports(out / "metrics");
  std::set<std::string> labels;
  bool heights = true;
  for (const auto& r : reports) {
    labels.insert(r.label);
    heights = heights && r.average.per_height.size() == static_cast<std::size_t>(cfg.dataset.grid.H);
  }
  std::ifstream table(out / "report" / "per_height.csv");
  const long rows = std::count(std::istreambuf_iterator<char>(table), std::istreambuf_iterator<char>(), '\n') - 1;
  const bool files = fs::exists(out / "report" / "summary.csv") && fs::exists(out / "report" / "per_height_nmse.svg");
  std::string ordering;
  for (const auto& r : reports) ordering += " " + r.label.substr(r.label.find('/') + 1) + fmt("=%.2f", r.average.nmse_db);
  return {reports.size() == 4 && heights && files && rows == 4L * cfg.dataset.grid.H,
          std::to_string(reports.size()) + " labelled reports, " + std::to_string(rows) +
              " per-height rows; held-out NMSE dB:" + ordering};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--only") {
      std::stringstream ss(argv[i + 1]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"flow identities", flow_identities},     {"oracle ODE exactness", oracle_ode},
      {"gradient checks", gradient_checks},     {"RoPE properties", rope_properties},
      {"mask accounting", mask_accounting},     {"condition grids", condition_grids},
      {"propagation oracle", propagation_oracle}, {"AdaLN-Zero identity", adaln_identity},
      {"overfit target", overfit_target},       {"kriging", kriging_properties},
      {"metric oracles", metric_oracles},       {"end-to-end determinism", determinism},
      {"zero-shot frequency report", zero_shot_report}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%-4s %2d %-28s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d failed\n", failed);
  return failed == 0 ? 0 : 1;
}
