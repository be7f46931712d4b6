#include "doctest.h"

#include <cmath>

#include "farm/cond/flow.hpp"
#include "farm/infer/sampler.hpp"

#include "../fixtures.hpp"
#include "../helpers.hpp"

using namespace farm;
using namespace farm::infer;
using farm::testing::micro_grid;
using farm::testing::micro_norm;

namespace {

/// Returns the ground truth at every call and records what it was given.
class OracleDenoiser : public Denoiser {
 public:
  explicit OracleDenoiser(Field truth) : truth_(std::move(truth)) {}
  Field predict_clean(const cond::ConditionedInput& input, const PatchPlan&) const override {
    calls.push_back(input);
    return truth_;
  }
  mutable std::vector<cond::ConditionedInput> calls;

 private:
  Field truth_;
};

/// Echoes its radio input back as the clean prediction.
class EchoDenoiser : public Denoiser {
 public:
  Field predict_clean(const cond::ConditionedInput& input, const PatchPlan&) const override {
    return input.channels[cond::kRadio];
  }
};

struct Setup {
  PatchPlan plan{micro_grid(), {4, 4, 2}};
  NormRange norm = micro_norm();
  train::TrainingExample ex = farm::testing::micro_examples(1, 3)[0];
  ArmVolume truth = denormalize(ex.r_unit, norm);
};

}  // namespace

TEST_CASE("velocity") {
  Setup s;
  const auto mask = cond::sample_mask(s.plan.count(), 0.75, 1);
  const Field eps = cond::gaussian_field(micro_grid(), 2);
  const Field v0 = velocity(s.ex.r_unit, eps, 0.0, mask, s.plan);
  const Field vz = velocity(eps, eps, 0.3, mask, s.plan);
  for (int p = 0; p < s.plan.count(); ++p) {
    const bool masked = std::find(mask.masked_ids.begin(), mask.masked_ids.end(), p) != mask.masked_ids.end();
    for (auto i : s.plan.voxel_indices(p)) {
      CHECK(v0[i] == doctest::Approx(masked ? s.ex.r_unit[i] - eps[i] : 0.0));
      CHECK(vz[i] == 0.0);
    }
  }
  // Affine in the prediction.
  const Field a = farm::testing::random_field(micro_grid(), 5), b = farm::testing::random_field(micro_grid(), 6);
  Field mix(micro_grid());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.25 * a[i] + 0.75 * b[i];
  const Field va = velocity(a, eps, 0.4, mask, s.plan), vb = velocity(b, eps, 0.4, mask, s.plan);
  const Field vm = velocity(mix, eps, 0.4, mask, s.plan);
  for (std::size_t i = 0; i < mix.size(); ++i) CHECK(vm[i] == doctest::Approx(0.25 * va[i] + 0.75 * vb[i]));
  CHECK_THROWS_AS(velocity(a, eps, 1.0 - 1e-4, mask, s.plan), InvalidArgument);
}

TEST_CASE("oracle denoiser is reproduced exactly in every mode") {
  Setup s;
  const auto obs = sample_observations(s.truth, s.plan, 0.25, 7);
  for (Mode mode : {Mode::ConditionFree, Mode::ConditionOnly, Mode::Hybrid}) {
    for (int k : {1, 2, 8}) {
      CAPTURE(to_string(mode));
      CAPTURE(k);
      OracleDenoiser oracle(s.ex.r_unit);
      InferenceRequest req{mode, k, 9, {}, {}};
      if (mode != Mode::ConditionOnly) req.observations = obs;
      if (mode != Mode::ConditionFree) req.grids = s.ex.grids;
      const auto out = sample(oracle, req, s.plan, s.norm);
      REQUIRE(oracle.calls.size() == static_cast<std::size_t>(k));
      for (std::size_t i = 0; i < out.volume.values.size(); ++i) {
        CHECK(std::abs(out.volume.values[i] - s.truth.values[i]) < 1e-5);
      }
      // Each call sees the exact probability path Z_t = t R + (1 - t) eps on masked patches.
      const Field eps = cond::gaussian_field(micro_grid(), 9);
      for (int step = 0; step < k; ++step) {
        const auto& in = oracle.calls[static_cast<std::size_t>(step)];
        const double t = static_cast<double>(step) / k;
        CHECK(in.t == doctest::Approx(t));
        for (int p : in.mask.masked_ids)
          for (auto i : s.plan.voxel_indices(p))
            CHECK(in.channels[cond::kRadio][i] == doctest::Approx(t * s.ex.r_unit[i] + (1 - t) * eps[i]).epsilon(1e-9));
        if (mode == Mode::ConditionFree) {
          CHECK(in.channels[cond::kPosition][0] == cond::kMissingCondition);
        } else {
          CHECK(in.channels[cond::kBuildings] == s.ex.grids.buildings);
        }
      }
      CHECK(out.metadata.at("mode") == to_string(mode));
      CHECK(out.metadata.at("steps") == k);
    }
  }
}

TEST_CASE("observed voxels pass through") {
  Setup s;
  const auto obs = sample_observations(s.truth, s.plan, 0.25, 4);
  EchoDenoiser echo;
  for (Mode mode : {Mode::ConditionFree, Mode::Hybrid}) {
    InferenceRequest req{mode, 2, 1, obs, {}};
    if (mode == Mode::Hybrid) req.grids = s.ex.grids;
    const auto out = sample(echo, req, s.plan, s.norm);
    for (std::size_t k = 0; k < obs.size(); ++k) CHECK(std::abs(out.volume.values[obs.indices[k]] - obs.values[k]) < 1e-5);
  }

  // Patch-mean imputation inside a partially observed patch.
  SparseObservation partial;
  const auto ids = s.plan.voxel_indices(1);
  partial.indices = {ids[0], ids[5]};
  partial.values = {-60.0, -80.0};
  const auto seen = observed_patches(partial, s.plan, s.norm);
  CHECK(seen.visible_ids == std::vector<int>{1});
  const double mean = 0.5 * (s.norm.normalize(-60.0) + s.norm.normalize(-80.0));
  CHECK(seen.radio[ids[3]] == doctest::Approx(mean));
  CHECK(seen.radio[ids[0]] == doctest::Approx(s.norm.normalize(-60.0)));
  CHECK(seen.observed[ids[5]]);
  CHECK_FALSE(seen.observed[ids[3]]);
}

TEST_CASE("sampling is deterministic in the seed") {
  Setup s;
  model::FarmModel m(farm::testing::micro_model(), 1);
  FarmDenoiser den(m);
  InferenceRequest req{Mode::ConditionOnly, 2, 5, {}, s.ex.grids};
  const auto a = sample(den, req, s.plan, s.norm), b = sample(den, req, s.plan, s.norm);
  CHECK(a.volume.values == b.volume.values);
  req.seed = 6;
  CHECK_FALSE(sample(den, req, s.plan, s.norm).volume.values == a.volume.values);
  for (double v : a.volume.values.data()) CHECK(std::isfinite(v));
}

TEST_CASE("mode constraints are checked before any work") {
  Setup s;
  const auto obs = sample_observations(s.truth, s.plan, 0.25, 4);
  OracleDenoiser oracle(s.ex.r_unit);
  auto expect_error = [&](InferenceRequest req, const std::string& phrase) {
    try {
      sample(oracle, req, s.plan, s.norm);
      FAIL("expected an error mentioning " << phrase);
    } catch (const InvalidArgument& e) {
      CHECK(std::string(e.what()).find(phrase) != std::string::npos);
    }
  };
  expect_error({Mode::ConditionFree, 1, 0, {}, {}}, "requires observations");
  expect_error({Mode::ConditionFree, 1, 0, obs, s.ex.grids}, "forbids condition grids");
  expect_error({Mode::ConditionOnly, 1, 0, {}, {}}, "requires condition grids");
  expect_error({Mode::Hybrid, 1, 0, obs, {}}, "requires both");
  expect_error({Mode::Hybrid, 1, 0, {}, s.ex.grids}, "requires both");
  expect_error({Mode::ConditionOnly, 0, 0, {}, s.ex.grids}, "steps");
  CHECK(oracle.calls.empty());
  CHECK_THROWS_AS(estimate_arm(oracle, s.plan, s.norm, {}, {}), InvalidArgument);
  CHECK(oracle.calls.empty());
}

TEST_CASE("dispatch by available inputs") {
  Setup s;
  const auto obs = sample_observations(s.truth, s.plan, 0.25, 4);
  OracleDenoiser oracle(s.ex.r_unit);
  CHECK(estimate_arm(oracle, s.plan, s.norm, {}, obs).metadata.at("mode") == to_string(Mode::ConditionFree));
  CHECK(estimate_arm(oracle, s.plan, s.norm, s.ex.grids, {}).metadata.at("mode") == to_string(Mode::ConditionOnly));
  const auto both = estimate_arm(oracle, s.plan, s.norm, s.ex.grids, obs, 2, 3);
  CHECK(both.metadata.at("mode") == to_string(Mode::Hybrid));
  CHECK(both.metadata.at("steps") == 2);
  CHECK(both.metadata.at("seed") == 3);
  CHECK(estimate_arm(oracle, s.plan, s.norm, s.ex.grids, {}).metadata.at("visible_patches") == 0);
  CHECK(parse_mode("free") == Mode::ConditionFree);
  CHECK(parse_mode("cond") == Mode::ConditionOnly);
  CHECK(parse_mode("hybrid") == Mode::Hybrid);
  CHECK_THROWS(parse_mode("guess"));
}

TEST_CASE("observation sampling") {
  const VoxelGridSpec big{64, 64, 8, 4.0, {0, 0, 0}};
  const PatchPlan plan(big, {16, 16, 2});
  CHECK(plan.count() == 64);
  ArmVolume truth{farm::testing::random_field(big, 1, -100, -40), micro_norm()};
  const auto obs = sample_observations(truth, plan, 0.05, 3);
  CHECK(obs.size() == 4u * 512u);
  CHECK(std::is_sorted(obs.indices.begin(), obs.indices.end()));
  for (std::size_t k = 0; k < obs.size(); ++k) CHECK(obs.values[k] == truth.values[obs.indices[k]]);
  const auto again = sample_observations(truth, plan, 0.05, 3);
  CHECK(again.indices == obs.indices);
  CHECK(sample_observations(truth, plan, 0.05, 4).indices != obs.indices);
}
