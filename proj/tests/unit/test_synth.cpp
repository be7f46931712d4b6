#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "farm/core/hash.hpp"
#include "farm/synth/antenna.hpp"
#include "farm/synth/dataset.hpp"
#include "farm/synth/propagation.hpp"
#include "farm/synth/scene.hpp"

#include "../helpers.hpp"
#include "../oracles.hpp"

using namespace farm;
using namespace farm::synth;
using farm::testing::grid;

namespace {

BuildingGrid empty_grid(const VoxelGridSpec& spec) { return {VoxelArray<std::uint8_t>(spec, 0)}; }

BuildingGrid slab_grid() {
  auto b = empty_grid(grid(12, 3, 3, 4.0));
  for (int l = 4; l < 6; ++l)
    for (int w = 0; w < 3; ++w)
      for (int h = 0; h < 3; ++h) b.occupancy(l, w, h) = 1;
  return b;
}

VoxelCoord random_voxel(const VoxelGridSpec& s, std::mt19937_64& gen) {
  return {static_cast<int>(gen() % s.L), static_cast<int>(gen() % s.W), static_cast<int>(gen() % s.H)};
}

}  // namespace

TEST_CASE("antenna pattern") {
  for (auto type : {AntennaType::Dir30, AntennaType::Dir60, AntennaType::Dir120}) {
    const auto m = AntennaModel::for_type(type);
    CHECK(antenna_gain(m, 0.0, 0.0) == doctest::Approx(m.g_max_dbi));
    const double half = m.hpbw_deg / 2.0 * std::numbers::pi / 180.0;
    CHECK(antenna_gain(m, half, 0.0) == doctest::Approx(m.g_max_dbi - 3.0).epsilon(1e-12));
    CHECK(antenna_gain(m, std::numbers::pi, std::numbers::pi / 2) == doctest::Approx(m.g_max_dbi - 25.0));
  }
  CHECK(AntennaModel::for_type(AntennaType::Dir120).g_max_dbi == 8.0);
  CHECK(AntennaModel::for_type(AntennaType::Dir60).g_max_dbi == 12.0);
  CHECK(AntennaModel::for_type(AntennaType::Dir30).g_max_dbi == 15.0);
  const auto iso = AntennaModel::for_type(AntennaType::Iso);
  CHECK(antenna_gain(iso, 1.3, -0.4) == 0.0);

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-7.0, 7.0);
  for (auto type : {AntennaType::Dir30, AntennaType::Dir60, AntennaType::Dir120}) {
    const auto m = AntennaModel::for_type(type);
    for (int i = 0; i < 200; ++i) {
      const double a = u(gen), e = u(gen);
      const double g = antenna_gain(m, a, e);
      CHECK(g <= m.g_max_dbi);
      CHECK(g >= m.g_max_dbi - 25.0);
      CHECK(g == doctest::Approx(oracle::gain_dbi(type, a, e)).epsilon(1e-9));
    }
  }
}

TEST_CASE("wrap_angle lands in (-pi, pi]") {
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
  for (double a = -20.0; a < 20.0; a += 0.37) {
    const double w = wrap_angle(a);
    CHECK(w > -std::numbers::pi);
    CHECK(w <= std::numbers::pi + 1e-12);
    CHECK(std::remainder(w - a, 2 * std::numbers::pi) == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("fspl closed form") {
  CHECK(fspl_db(1.0, 1.0, 0.0) == doctest::Approx(0.0));
  CHECK(fspl_db(100.0, 2.1e9) == doctest::Approx(40.0 + 20.0 * std::log10(2.1e9) - 147.55));
  CHECK(fspl_db(100.0, 2.1e9) == doctest::Approx(78.89).epsilon(1e-4));
  CHECK(fspl_db(20.0, 3.5e9) - fspl_db(10.0, 3.5e9) == doctest::Approx(6.0206).epsilon(1e-4));
  double prev = fspl_db(0.5, 3.5e9);
  for (double d = 1.0; d < 500.0; d *= 1.3) {
    CHECK(fspl_db(d, 3.5e9) > prev);
    prev = fspl_db(d, 3.5e9);
  }
  CHECK(fspl_db(10.0, 5.9e9) > fspl_db(10.0, 2.1e9));
  const auto s = grid(4, 4, 2, 4.0);
  CHECK(tx_distance_m(s, {1, 1, 1}, {1, 1, 1}) == doctest::Approx(2.0));
  CHECK(tx_distance_m(s, {0, 0, 0}, {3, 0, 0}) == doctest::Approx(12.0));
}

TEST_CASE("blockage traversal") {
  const auto empty = empty_grid(grid(16, 16, 8));
  CHECK(trace_attenuation(empty, {0, 0, 0}, {15, 9, 7}) == 0.0);

  const auto slab = slab_grid();
  CHECK(trace_attenuation(slab, {0, 0, 0}, {10, 0, 0}) == doctest::Approx(8.0));
  CHECK(trace_attenuation(slab, {5, 1, 1}, {5, 1, 1}) == 0.0);
  CHECK(trace_attenuation(slab, {0, 0, 0}, {3, 2, 2}) == 0.0);

  std::mt19937_64 gen(11);
  const auto scene = generate_scene(3, grid(24, 20, 6), 8);
  const auto& b = scene.buildings;
  for (int i = 0; i < 300; ++i) {
    const auto a = random_voxel(b.spec(), gen), c = random_voxel(b.spec(), gen);
    const double ab = trace_attenuation(b, a, c);
    CHECK(ab == doctest::Approx(trace_attenuation(b, c, a)).epsilon(1e-9).scale(1.0));
    CHECK(ab == doctest::Approx(oracle::blockage_m(b, a, c)).epsilon(1e-9).scale(1.0));
  }

  const auto lengths = blockage_lengths(b, scene.bs.p_tx);
  for (int i = 0; i < 50; ++i) {
    const auto v = random_voxel(b.spec(), gen);
    CHECK(lengths(v[0], v[1], v[2]) == doctest::Approx(oracle::blockage_m(b, scene.bs.p_tx, v)).scale(1.0));
  }
}

TEST_CASE("render matches the propagation equation") {
  PropagationParams params;
  SUBCASE("slab costs exactly alpha_b times its thickness") {
    const auto slab = slab_grid();
    BsConfig bs{{0, 1, 1}, 30.0, 3.5e9, AntennaType::Iso, 0.0, 0.0};
    const auto vol = render_arm(slab, bs, params);
    const auto open = render_arm(empty_grid(slab.spec()), bs, params);
    CHECK(open.values(10, 1, 1) - vol.values(10, 1, 1) == doctest::Approx(1.5 * 8.0));
    CHECK(open.values(3, 1, 1) == vol.values(3, 1, 1));
    const double d = 40.0;
    CHECK(open.values(10, 1, 1) == doctest::Approx(30.0 - fspl_db(d, 3.5e9)));
  }
  SUBCASE("2 m of building is 3 dB") {
    auto b = empty_grid({12, 1, 1, 1.0, {0, 0, 0}});
    b.occupancy(5, 0, 0) = b.occupancy(6, 0, 0) = 1;
    BsConfig bs{{0, 0, 0}, 30.0, 3.5e9, AntennaType::Iso, 0.0, 0.0};
    const auto blocked = render_arm(b, bs, params);
    const auto open = render_arm(empty_grid(b.spec()), bs, params);
    CHECK(open.values(10, 0, 0) - blocked.values(10, 0, 0) == doctest::Approx(3.0));
  }
  SUBCASE("empty scene is radially monotone") {
    const auto s = grid(20, 20, 6);
    BsConfig bs{{10, 10, 3}, 30.0, 2.1e9, AntennaType::Iso, 0.0, 0.0};
    const auto vol = render_arm(empty_grid(s), bs, params);
    const std::array<VoxelCoord, 5> dirs{{{1, 0, 0}, {0, -1, 0}, {1, 1, 0}, {-1, 1, 1}, {1, -1, -1}}};
    for (const auto& dir : dirs) {
      double prev = vol.values(10, 10, 3);
      for (int k = 1;; ++k) {
        const VoxelCoord v{10 + k * dir[0], 10 + k * dir[1], 3 + k * dir[2]};
        if (!s.contains(v)) break;
        CHECK(vol.values(v[0], v[1], v[2]) < prev);
        prev = vol.values(v[0], v[1], v[2]);
      }
    }
  }
  SUBCASE("random voxels agree with an independent evaluation") {
    std::mt19937_64 gen(21);
    for (auto type : {AntennaType::Iso, AntennaType::Dir30, AntennaType::Dir60, AntennaType::Dir120}) {
      auto scene = generate_scene(40 + static_cast<int>(type), grid(24, 24, 8), 10);
      scene.bs.antenna = type;
      const auto vol = render_arm(scene.buildings, scene.bs, params);
      const auto again = render_arm(scene.buildings, scene.bs, params);
      CHECK(vol.values == again.values);
      for (int i = 0; i < 10; ++i) {
        const auto v = random_voxel(vol.spec(), gen);
        const double want = oracle::rss_dbm(scene.buildings, scene.bs, 1.5, kFreeSpaceConstantDb, v);
        CHECK(std::abs(vol.values(v[0], v[1], v[2]) - want) < 1e-6);
      }
    }
  }
  SUBCASE("shadowing is seeded") {
    params.shadowing = Shadowing{6.0, 20.0, 9};
    const auto scene = generate_scene(1, grid(16, 16, 4), 4);
    const auto a = render_arm(scene.buildings, scene.bs, params);
    const auto b = render_arm(scene.buildings, scene.bs, params);
    CHECK(a.values == b.values);
    params.shadowing->seed = 10;
    CHECK_FALSE(render_arm(scene.buildings, scene.bs, params).values == a.values);
  }
}

TEST_CASE("scene generation") {
  const auto s = grid(64, 64, 8);
  const auto a = generate_scene(7, s, 10);
  const auto b = generate_scene(7, s, 10);
  CHECK(a.buildings.occupancy == b.buildings.occupancy);
  CHECK(a.bs == b.bs);
  const double frac = a.buildings.occupied_fraction();
  CHECK(frac > 0.0);
  CHECK(frac < 0.5);
  CHECK_NOTHROW(a.buildings.validate());
  CHECK_FALSE(a.buildings.occupied(a.bs.p_tx[0], a.bs.p_tx[1], a.bs.p_tx[2]));
  CHECK_FALSE(generate_scene(8, s, 10).buildings.occupancy == a.buildings.occupancy);

  const auto none = generate_scene(3, s, 0);
  CHECK(none.buildings.occupied_fraction() == 0.0);

  BuildingGrid full{VoxelArray<std::uint8_t>(grid(4, 4, 2), 1)};
  CHECK_THROWS(place_transmitter(full, 1));
}

TEST_CASE("dataset build and load") {
  DatasetConfig cfg;
  cfg.grid = grid(16, 16, 4);
  cfg.split = {8, 1, 1};
  cfg.subsets = {SubsetConfig{"a", {2.1, 3.5}, {AntennaType::Iso}, 5, 4, 3, 0, false},
                 SubsetConfig{"z", {7.1}, {AntennaType::Dir60}, 1, 2, 3, 0, true}};
  CHECK(cfg.sample_count() == 42);

  const auto dir1 = farm::testing::scratch_dir("ds1");
  const auto dir2 = farm::testing::scratch_dir("ds2");
  const auto m1 = build_dataset(cfg, dir1, 17);
  const auto m2 = build_dataset(cfg, dir2, 17, 2);
  CHECK(m1.at("content_hash") == m2.at("content_hash"));
  CHECK(m1.at("samples").size() == 42);

  const auto ds = Dataset::load(dir1);
  CHECK(ds.samples().size() == 42);
  CHECK(ds.select("train", "a").size() == 32);
  CHECK(ds.select("val", "a").size() == 4);
  CHECK(ds.select("test", "a").size() == 4);
  CHECK(ds.select("test", "z").size() == 2);
  CHECK(ds.select("train", "z").empty());
  for (const auto& s : ds.samples()) {
    for (double v : s.volume.values.data()) {
      CHECK(std::isfinite(v));
      if (!std::isfinite(v)) break;
    }
  }

  const auto splits = assign_splits(80, {8, 1, 1}, 3);
  CHECK(std::count(splits.begin(), splits.end(), "train") == 64);
  CHECK(std::count(splits.begin(), splits.end(), "val") == 8);
  CHECK(std::count(splits.begin(), splits.end(), "test") == 8);

  CHECK(kCarrierFrequenciesGhz == std::array<double, 7>{2.1, 2.6, 3.3, 3.5, 4.9, 5.9, 7.1});
  cfg.subsets[0].frequencies_ghz = {3.0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  DatasetConfig bigger;
  bigger.subsets = {SubsetConfig{"d", {2.1, 3.3}, {AntennaType::Iso}, 10, 4, 10, 0, false}};
  CHECK(bigger.sample_count() == 80);
}
