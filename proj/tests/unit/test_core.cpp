#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"

#include "farm/core/error.hpp"
#include "farm/core/hash.hpp"
#include "farm/core/io.hpp"
#include "farm/core/patch.hpp"
#include "farm/core/types.hpp"

using namespace farm;
using farm::testing::grid;

TEST_CASE("normalize maps the range endpoints and midpoint") {
  NormRange n{-150.0, -50.0};
  CHECK(n.normalize(-150.0) == doctest::Approx(-1.0));
  CHECK(n.normalize(-50.0) == doctest::Approx(1.0));
  CHECK(n.normalize(-100.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("normalize rejects a degenerate range") {
  CHECK_THROWS_AS(NormRange({-80.0, -80.0}).validate(), InvalidArgument);
  ArmVolume v{Field(grid(2, 2, 2), -80.0), NormRange{-80.0, -80.0}};
  CHECK_THROWS_AS(normalize(v), InvalidArgument);
}

TEST_CASE("normalize and denormalize round trip") {
  NormRange n{-230.0, -10.0};
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(n.min_dbm, n.max_dbm);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = u(gen);
    const double y = n.normalize(x);
    CHECK(y >= -1.0);
    CHECK(y <= 1.0);
    worst = std::max(worst, std::abs(n.denormalize(y) - x));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("normalize clamps values outside the range") {
  NormRange n{-150.0, -50.0};
  CHECK(n.normalize(-400.0) == -1.0);
  CHECK(n.normalize(10.0) == 1.0);
}

TEST_CASE("voxel index and coordinate are inverse") {
  const auto spec = grid(5, 3, 4);
  for (std::size_t i = 0; i < spec.voxel_count(); ++i) {
    const auto c = spec.coord(i);
    CHECK(spec.index(c[0], c[1], c[2]) == i);
  }
  CHECK(spec.index(0, 0, 1) == 1);
  CHECK(spec.index(0, 1, 0) == 4);
}

TEST_CASE("grid spec validation") {
  CHECK_NOTHROW(grid(4, 4, 2).validate());
  CHECK_THROWS_AS(grid(0, 4, 2).validate(), InvalidArgument);
  CHECK_THROWS_AS(grid(4, 4, 2, 0.0).validate(), InvalidArgument);
}

TEST_CASE("patch plan counts and enumeration") {
  SUBCASE("single patch") {
    PatchPlan plan(grid(16, 16, 2), {16, 16, 2});
    CHECK(plan.count() == 1);
  }
  SUBCASE("desk grid") {
    PatchPlan plan(grid(64, 64, 8), {16, 16, 2});
    CHECK(plan.count() == 64);
    CHECK(plan.grid_dims() == VoxelCoord{4, 4, 4});
    CHECK(plan.coord(0) == VoxelCoord{0, 0, 0});
    CHECK(plan.coord(1) == VoxelCoord{0, 0, 1});
    CHECK(plan.coord(4) == VoxelCoord{0, 1, 0});
    CHECK(plan.coord(63) == VoxelCoord{3, 3, 3});
  }
  SUBCASE("wide patches") {
    PatchPlan plan(grid(64, 64, 8), {32, 32, 2});
    CHECK(plan.count() == 16);
  }
  SUBCASE("non-divisible dimensions are rejected") {
    CHECK_THROWS_AS(PatchPlan(grid(60, 64, 8), {16, 16, 2}), InvalidArgument);
    CHECK_THROWS_AS(PatchPlan(grid(64, 64, 7), {16, 16, 2}), InvalidArgument);
  }
}

TEST_CASE("patch plan is deterministic and covers every voxel once") {
  const auto spec = grid(8, 8, 4);
  PatchPlan a(spec, {4, 4, 2}), b(spec, {4, 4, 2});
  CHECK(a.coords() == b.coords());
  std::set<std::size_t> seen;
  for (int p = 0; p < a.count(); ++p) {
    const auto idx = a.voxel_indices(p);
    CHECK(idx == b.voxel_indices(p));
    for (auto i : idx) {
      CHECK(a.patch_of(spec.coord(i)) == p);
      seen.insert(i);
    }
  }
  CHECK(seen.size() == spec.voxel_count());
}

TEST_CASE("patch gather and scatter round trip") {
  const auto spec = grid(8, 4, 4);
  PatchPlan plan(spec, {4, 2, 2});
  const Field f = farm::testing::random_field(spec, 11);
  Field g(spec, 0.0);
  std::vector<double> buf(static_cast<std::size_t>(plan.patch().voxels()));
  for (int p = 0; p < plan.count(); ++p) {
    plan.gather(f.data(), p, buf);
    plan.scatter(buf, p, g.data());
  }
  CHECK(f == g);
}

TEST_CASE("patch voxel order within a patch is (l, w, h) with h fastest") {
  const auto spec = grid(4, 4, 4);
  PatchPlan plan(spec, {2, 2, 2});
  const auto idx = plan.voxel_indices(plan.patch_of({2, 0, 2}));
  CHECK(idx[0] == spec.index(2, 0, 2));
  CHECK(idx[1] == spec.index(2, 0, 3));
  CHECK(idx[2] == spec.index(2, 1, 2));
  CHECK(idx[4] == spec.index(3, 0, 2));
}

TEST_CASE("building grid validation") {
  const auto spec = grid(4, 4, 3);
  BuildingGrid b{VoxelArray<std::uint8_t>(spec, 0)};
  b.occupancy(1, 1, 0) = 1;
  b.occupancy(1, 1, 1) = 1;
  CHECK_NOTHROW(b.validate());
  CHECK(b.occupied_fraction() == doctest::Approx(2.0 / 48.0));
  b.occupancy(2, 2, 2) = 1;  // floating voxel
  CHECK_THROWS_AS(b.validate(), InvalidArgument);
  b.occupancy(2, 2, 2) = 3;
  CHECK_THROWS_AS(b.validate(), InvalidArgument);
}

TEST_CASE("FNV-1a reference digests") {
  CHECK(hash_hex(std::string_view("")) == "cbf29ce484222325");
  CHECK(hash_hex(std::string_view("a")) == "af63dc4c8601ec8c");
  CHECK(hash_hex(std::string_view("foobar")) == "85944171f73967e8");
}

TEST_CASE("antenna type names round trip") {
  for (auto t : {AntennaType::Iso, AntennaType::Dir30, AntennaType::Dir60, AntennaType::Dir120}) {
    CHECK(parse_antenna_type(to_string(t)) == t);
  }
  CHECK_THROWS_AS(parse_antenna_type("dir45"), InvalidArgument);
  CHECK(hpbw_degrees(AntennaType::Dir60) == 60.0);
}

TEST_CASE("bs config validation") {
  const auto spec = grid(8, 8, 4);
  BsConfig bs;
  bs.p_tx = {3, 3, 1};
  CHECK_NOTHROW(bs.validate(spec));
  bs.p_tx = {8, 3, 1};
  CHECK_THROWS_AS(bs.validate(spec), InvalidArgument);
  bs.p_tx = {3, 3, 1};
  bs.carrier_hz = 0.0;
  CHECK_THROWS_AS(bs.validate(spec), InvalidArgument);
}

TEST_CASE("sparse observation validation") {
  const auto spec = grid(4, 4, 2);
  SparseObservation o{{0, 5, 9}, {-80.0, -90.0, -70.0}, 0.1};
  CHECK_NOTHROW(o.validate(spec));
  o.indices[1] = 0;
  CHECK_THROWS_AS(o.validate(spec), InvalidArgument);
  o.indices[1] = 32;
  CHECK_THROWS_AS(o.validate(spec), InvalidArgument);
  o.indices[1] = 5;
  o.values.pop_back();
  CHECK_THROWS_AS(o.validate(spec), InvalidArgument);
}

TEST_CASE("json conversions round trip") {
  const auto spec = grid(8, 4, 2, 2.5);
  nlohmann::json j = spec;
  CHECK(j.get<VoxelGridSpec>() == spec);
  NormRange n{-120.0, -20.0};
  j = n;
  CHECK(j.get<NormRange>() == n);
  BsConfig bs;
  bs.p_tx = {1, 2, 1};
  bs.antenna = AntennaType::Dir30;
  bs.azimuth = 0.25;
  j = bs;
  CHECK(j.get<BsConfig>() == bs);
}

TEST_CASE("f32 and u8 files round trip") {
  const auto dir = farm::testing::scratch_dir("core_io");
  std::vector<double> v{-100.25, 0.0, 3.5, -1e-3};
  io::write_f32(dir / "v.f32", v);
  const auto back = io::read_f32(dir / "v.f32", v.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(back[i] == static_cast<double>(static_cast<float>(v[i])));
  CHECK_THROWS_AS(io::read_f32(dir / "v.f32", v.size() + 1), IoError);
  CHECK_THROWS_AS(io::read_f32(dir / "missing.f32", 1), IoError);

  std::vector<std::uint8_t> b{0, 1, 1, 0, 255};
  io::write_u8(dir / "b.u8", b);
  CHECK(io::read_u8(dir / "b.u8", b.size()) == b);
}

TEST_CASE("json files and unknown-key rejection") {
  const auto dir = farm::testing::scratch_dir("core_json");
  io::write_json(dir / "a.json", {{"x", 1}});
  CHECK(io::read_json(dir / "a.json").at("x") == 1);
  io::write_text(dir / "bad.json", "{ not json");
  CHECK_THROWS_AS(io::read_json(dir / "bad.json"), IoError);
  CHECK_NOTHROW(io::reject_unknown_keys({{"a", 1}}, {"a", "b"}, "ctx"));
  CHECK_THROWS_AS(io::reject_unknown_keys({{"c", 1}}, {"a", "b"}, "ctx"), ConfigError);
}
