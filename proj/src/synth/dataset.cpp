#include "farm/synth/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "farm/core/error.hpp"
#include "farm/core/hash.hpp"
#include "farm/core/io.hpp"
#include "farm/core/rng.hpp"

namespace farm::synth {

using nlohmann::json;

void DatasetConfig::validate() const {
  grid.validate();
  propagation.validate();
  if (norm) norm->validate();
  if (split[0] < 0 || split[1] < 0 || split[2] < 0 || split[0] + split[1] + split[2] == 0) {
    throw ConfigError("split ratios must be non-negative and not all zero");
  }
  if (subsets.empty()) throw ConfigError("dataset config needs at least one subset");
  std::map<std::string, int> names;
  for (const auto& s : subsets) {
    if (s.name.empty()) throw ConfigError("subset name must be non-empty");
    if (++names[s.name] > 1) throw ConfigError("duplicate subset name '" + s.name + "'");
    if (s.scenes < 1 || s.tx_per_scene < 1) throw ConfigError("subset '" + s.name + "' needs scenes and tx >= 1");
    if (s.buildings_per_scene < 0) throw ConfigError("subset '" + s.name + "' has negative building count");
    if (s.frequencies_ghz.empty() || s.antennas.empty()) {
      throw ConfigError("subset '" + s.name + "' needs at least one frequency and one antenna");
    }
    for (double f : s.frequencies_ghz) {
      const bool known = std::any_of(kCarrierFrequenciesGhz.begin(), kCarrierFrequenciesGhz.end(),
                                     [f](double k) { return std::abs(k - f) < 1e-9; });
      if (!known) {
        throw ConfigError("subset '" + s.name + "': carrier " + std::to_string(f) +
                          " GHz is not one of 2.1, 2.6, 3.3, 3.5, 4.9, 5.9, 7.1");
      }
    }
  }
}

std::size_t DatasetConfig::sample_count() const {
  std::size_t n = 0;
  for (const auto& s : subsets) {
    n += static_cast<std::size_t>(s.scenes) * static_cast<std::size_t>(s.tx_per_scene) * s.frequencies_ghz.size() *
         s.antennas.size();
  }
  return n;
}

DatasetConfig dataset_config_from_json(const json& j) {
  io::reject_unknown_keys(j, {"grid", "tx_power_dbm", "propagation", "norm", "split", "subsets"}, "dataset");
  DatasetConfig c;
  try {
    if (j.contains("grid")) {
      io::reject_unknown_keys(j["grid"], {"L", "W", "H", "delta", "origin"}, "dataset.grid");
      c.grid = j["grid"].get<VoxelGridSpec>();
    }
    if (j.contains("tx_power_dbm")) j["tx_power_dbm"].get_to(c.tx_power_dbm);
    if (j.contains("propagation")) {
      const auto& p = j["propagation"];
      io::reject_unknown_keys(p, {"fspl_constant_db", "building_loss_db_per_m", "shadowing"}, "dataset.propagation");
      if (p.contains("fspl_constant_db")) p["fspl_constant_db"].get_to(c.propagation.fspl_constant_db);
      if (p.contains("building_loss_db_per_m")) p["building_loss_db_per_m"].get_to(c.propagation.building_loss_db_per_m);
      if (p.contains("shadowing") && !p["shadowing"].is_null()) {
        io::reject_unknown_keys(p["shadowing"], {"sigma_db", "correlation_m"}, "dataset.propagation.shadowing");
        Shadowing s;
        s.sigma_db = p["shadowing"].value("sigma_db", 0.0);
        s.correlation_m = p["shadowing"].value("correlation_m", 20.0);
        c.propagation.shadowing = s;
      }
    }
    if (j.contains("norm") && !j["norm"].is_null()) c.norm = j["norm"].get<NormRange>();
    if (j.contains("split")) j["split"].get_to(c.split);
    if (j.contains("subsets")) {
      c.subsets.clear();
      for (const auto& sj : j["subsets"]) {
        io::reject_unknown_keys(sj,
                                {"name", "frequencies_ghz", "antennas", "scenes", "tx_per_scene",
                                 "buildings_per_scene", "max_building_height", "zero_shot"},
                                "dataset.subsets[]");
        SubsetConfig s;
        s.name = sj.value("name", s.name);
        if (sj.contains("frequencies_ghz")) sj["frequencies_ghz"].get_to(s.frequencies_ghz);
        if (sj.contains("antennas")) {
          s.antennas.clear();
          for (const auto& a : sj["antennas"]) s.antennas.push_back(parse_antenna_type(a.get<std::string>()));
        }
        s.scenes = sj.value("scenes", s.scenes);
        s.tx_per_scene = sj.value("tx_per_scene", s.tx_per_scene);
        s.buildings_per_scene = sj.value("buildings_per_scene", s.buildings_per_scene);
        s.max_building_height = sj.value("max_building_height", s.max_building_height);
        s.zero_shot = sj.value("zero_shot", s.zero_shot);
        c.subsets.push_back(std::move(s));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("dataset config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("dataset config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const DatasetConfig& c) {
  json subsets = json::array();
  for (const auto& s : c.subsets) {
    json antennas = json::array();
    for (auto a : s.antennas) antennas.push_back(to_string(a));
    subsets.push_back({{"name", s.name},
                       {"frequencies_ghz", s.frequencies_ghz},
                       {"antennas", antennas},
                       {"scenes", s.scenes},
                       {"tx_per_scene", s.tx_per_scene},
                       {"buildings_per_scene", s.buildings_per_scene},
                       {"max_building_height", s.max_building_height},
                       {"zero_shot", s.zero_shot}});
  }
  json prop = {{"fspl_constant_db", c.propagation.fspl_constant_db},
               {"building_loss_db_per_m", c.propagation.building_loss_db_per_m},
               {"shadowing", nullptr}};
  if (c.propagation.shadowing) {
    prop["shadowing"] = {{"sigma_db", c.propagation.shadowing->sigma_db},
                         {"correlation_m", c.propagation.shadowing->correlation_m}};
  }
  json j = {{"grid", c.grid},   {"tx_power_dbm", c.tx_power_dbm}, {"propagation", prop},
            {"norm", nullptr},  {"split", c.split},               {"subsets", subsets}};
  if (c.norm) j["norm"] = *c.norm;
  return j;
}

std::vector<std::string> assign_splits(std::size_t n, const std::array<int, 3>& ratio, std::uint64_t seed) {
  const double total = ratio[0] + ratio[1] + ratio[2];
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio[0] / total + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio[1] / total + 1e-9));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 engine(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(engine() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<std::string> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[order[k]] = k < n_train ? "train" : (k < n_train + n_val ? "val" : "test");
  }
  return out;
}

namespace {

std::string frequency_tag(double ghz) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "f%.1f", ghz);
  return buf;
}

struct SampleRecord {
  std::string id;
  std::string scene;
  std::string subset;
  bool zero_shot = false;
  BsConfig bs;
  std::string hash;
  double min_dbm = 0.0;
  double max_dbm = 0.0;
};

struct TxTask {
  std::size_t scene;
  int tx;
  std::size_t first_sample;
};

}  // namespace

json build_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir, std::uint64_t seed, int jobs,
                   const std::string& version) {
  config.validate();
  const auto& spec = config.grid;

  struct SceneRecord {
    std::string id;
    std::string subset;
    BuildingGrid buildings;
    std::uint64_t seed;
    std::string hash;
  };
  std::vector<SceneRecord> scenes;
  std::vector<SampleRecord> samples;
  std::vector<TxTask> tasks;

  for (std::size_t si = 0; si < config.subsets.size(); ++si) {
    const auto& sub = config.subsets[si];
    SceneOptions options;
    options.max_height = sub.max_building_height;
    for (int k = 0; k < sub.scenes; ++k) {
      char id[96];
      std::snprintf(id, sizeof id, "%s_s%03d", sub.name.c_str(), k);
      const std::uint64_t scene_seed = derive_seed(derive_seed(seed, si), static_cast<std::uint64_t>(k));
      SceneRecord scene{id, sub.name, generate_buildings(scene_seed, spec, sub.buildings_per_scene, options),
                        scene_seed, ""};
      for (int t = 0; t < sub.tx_per_scene; ++t) {
        BsConfig placed = place_transmitter(scene.buildings, derive_seed(scene_seed, 1000 + static_cast<std::uint64_t>(t)),
                                            options);
        tasks.push_back({scenes.size(), t, samples.size()});
        for (double f : sub.frequencies_ghz) {
          for (auto a : sub.antennas) {
            SampleRecord rec;
            rec.scene = scene.id;
            rec.subset = sub.name;
            rec.zero_shot = sub.zero_shot;
            rec.bs = placed;
            rec.bs.tx_power_dbm = config.tx_power_dbm;
            rec.bs.carrier_hz = f * 1e9;
            rec.bs.antenna = a;
            rec.id = scene.id + "_t" + std::to_string(t) + "_" + frequency_tag(f) + "_" + to_string(a);
            samples.push_back(std::move(rec));
          }
        }
      }
      scenes.push_back(std::move(scene));
    }
  }

  for (auto& scene : scenes) {
    const auto path = out_dir / "buildings" / (scene.id + ".u8");
    io::write_u8(path, scene.buildings.occupancy.data());
    scene.hash = hash_hex(std::as_bytes(std::span<const std::uint8_t>(scene.buildings.occupancy.data())));
  }

  // Each (scene, tx) task owns its samples; shadowing streams derive from the sample index.
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t ti = next.fetch_add(1);
      if (ti >= tasks.size()) return;
      try {
        const auto& task = tasks[ti];
        const auto& scene = scenes[task.scene];
        const std::size_t end = ti + 1 < tasks.size() ? tasks[ti + 1].first_sample : samples.size();
        const Field blockage = blockage_lengths(scene.buildings, samples[task.first_sample].bs.p_tx);
        for (std::size_t s = task.first_sample; s < end; ++s) {
          auto params = config.propagation;
          if (params.shadowing) params.shadowing->seed = derive_seed(seed ^ 0x5eed5eedULL, s);
          const ArmVolume vol = render_arm(scene.buildings, samples[s].bs, params, {}, &blockage);
          const auto bytes = io::encode_f32(vol.values.data());
          io::write_bytes(out_dir / "volumes" / (samples[s].id + ".f32"), bytes);
          samples[s].hash = hash_hex(bytes);
          const auto [lo, hi] = std::minmax_element(vol.values.data().begin(), vol.values.data().end());
          samples[s].min_dbm = *lo;
          samples[s].max_dbm = *hi;
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> threads;
  for (int i = 1; i < n_threads; ++i) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);

  NormRange norm;
  if (config.norm) {
    norm = *config.norm;
  } else {
    double lo = samples.front().min_dbm;
    double hi = samples.front().max_dbm;
    for (const auto& s : samples) {
      lo = std::min(lo, s.min_dbm);
      hi = std::max(hi, s.max_dbm);
    }
    norm = {10.0 * std::floor(lo / 10.0), 10.0 * std::ceil(hi / 10.0)};
    if (norm.max_dbm <= norm.min_dbm) norm.max_dbm = norm.min_dbm + 10.0;
  }

  // Zero-shot subsets are held out entirely; the rest split by the seeded ratio.
  std::vector<std::size_t> regular;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].zero_shot) regular.push_back(i);
  }
  const auto splits = assign_splits(regular.size(), config.split, derive_seed(seed, 0x5b117ULL));
  std::vector<std::string> split_of(samples.size(), "test");
  for (std::size_t k = 0; k < regular.size(); ++k) split_of[regular[k]] = splits[k];

  Fnv1a content;
  json scene_list = json::array();
  for (const auto& s : scenes) {
    content.update(s.id);
    content.update(s.hash);
    scene_list.push_back({{"id", s.id},
                          {"subset", s.subset},
                          {"file", "buildings/" + s.id + ".u8"},
                          {"hash", s.hash},
                          {"occupied_fraction", s.buildings.occupied_fraction()}});
  }
  json sample_list = json::array();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    content.update(s.id);
    content.update(s.hash);
    sample_list.push_back({{"id", s.id},
                           {"scene", s.scene},
                           {"subset", s.subset},
                           {"split", split_of[i]},
                           {"bs", s.bs},
                           {"file", "volumes/" + s.id + ".f32"},
                           {"hash", s.hash}});
  }

  const json config_json = to_json(config);
  json manifest = {{"format", "farm-dataset"},
                   {"format_version", 1},
                   {"grid", spec},
                   {"norm", norm},
                   {"seed", seed},
                   {"config", config_json},
                   {"config_hash", hash_hex(config_json.dump())},
                   {"version", version},
                   {"content_hash", content.hex()},
                   {"scenes", scene_list},
                   {"samples", sample_list}};
  io::write_json(out_dir / "manifest.json", manifest);
  return manifest;
}

Dataset Dataset::load(const std::filesystem::path& dir) {
  Dataset ds;
  ds.manifest_ = io::read_json(dir / "manifest.json");
  try {
    if (ds.manifest_.at("format") != "farm-dataset") throw IoError("not a dataset manifest: " + dir.string());
    ds.grid_ = ds.manifest_.at("grid").get<VoxelGridSpec>();
    ds.norm_ = ds.manifest_.at("norm").get<NormRange>();
    ds.content_hash_ = ds.manifest_.at("content_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw IoError("malformed manifest in " + dir.string() + ": " + e.what());
  }
  std::map<std::string, std::shared_ptr<const BuildingGrid>> scenes;
  for (const auto& s : ds.manifest_.at("scenes")) {
    const auto path = dir / s.at("file").get<std::string>();
    auto occ = io::read_u8(path, ds.grid_.voxel_count());
    auto grid = std::make_shared<BuildingGrid>(BuildingGrid{VoxelArray<std::uint8_t>(ds.grid_, std::move(occ))});
    scenes[s.at("id").get<std::string>()] = std::move(grid);
  }
  for (const auto& s : ds.manifest_.at("samples")) {
    const auto path = dir / s.at("file").get<std::string>();
    const auto bytes = io::read_bytes(path);
    if (hash_hex(bytes) != s.at("hash").get<std::string>()) throw IoError("content hash mismatch: " + path.string());
    DatasetSample sample;
    sample.id = s.at("id").get<std::string>();
    sample.subset = s.at("subset").get<std::string>();
    sample.split = s.at("split").get<std::string>();
    sample.bs = s.at("bs").get<BsConfig>();
    sample.volume = {Field(ds.grid_, io::read_f32(path, ds.grid_.voxel_count())), ds.norm_};
    const auto it = scenes.find(s.at("scene").get<std::string>());
    if (it == scenes.end()) throw IoError("sample " + sample.id + " references a missing scene");
    sample.buildings = it->second;
    ds.samples_.push_back(std::move(sample));
  }
  return ds;
}

std::vector<const DatasetSample*> Dataset::select(const std::string& split, const std::string& subset) const {
  std::vector<const DatasetSample*> out;
  for (const auto& s : samples_) {
    if ((split.empty() || s.split == split) && (subset.empty() || s.subset == subset)) out.push_back(&s);
  }
  return out;
}

}  // namespace farm::synth
