#include "tactile_rom/train/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "tactile_rom/core/error.hpp"
#include "tactile_rom/io/traj.hpp"
#include "tactile_rom/mpm/transfer.hpp"

namespace trom::train {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ScenarioSpec scenario_from_json(const io::Cfg& c) {
  c.allow({"id", "offset", "depth", "speed", "hold", "clearance", "holdout"});
  ScenarioSpec s;
  s.id = c.str("id");
  if (s.id.empty() || s.id.find('/') != std::string::npos)
    c.fail("scenario id must be a non-empty path-safe string");
  if (c.has("offset")) {
    const json& v = c.raw().at("offset");
    if (!v.is_array() || v.size() != 2) c.fail("offset must be an array [x, y]");
    s.offset_x = v[0].get<double>();
    s.offset_y = v[1].get<double>();
  }
  s.depth = c.num("depth", s.depth);
  s.speed = c.num("speed", s.speed);
  s.hold = c.num("hold", s.hold);
  s.clearance = c.num("clearance", s.clearance);
  s.holdout = c.boolean("holdout", false);
  return s;
}

void check_paired_configs(const GenConfig& g, const io::Cfg& c) {
  const auto& f = g.fine;
  const auto& k = g.coarse;
  if (std::abs(f.material.young_modulus - k.material.young_modulus) > 0.0 ||
      std::abs(f.material.poisson_ratio - k.material.poisson_ratio) > 0.0 ||
      std::abs(f.material.density - k.material.density) > 0.0)
    c.fail("fine and coarse runs must share the material");
  if ((f.elastomer_origin - k.elastomer_origin).norm() > 0.0 ||
      (f.elastomer_extents - k.elastomer_extents).norm() > 0.0)
    c.fail("fine and coarse runs must share the elastomer box");
  if (f.indenter.shape != k.indenter.shape ||
      std::abs(f.indenter.radius - k.indenter.radius) > 0.0)
    c.fail("fine and coarse runs must share the indenter");
}

void apply_scenario(mpm::SimConfig& cfg, const ScenarioSpec& s) {
  cfg.indenter.motion.depth = s.depth;
  cfg.indenter.motion.speed = s.speed;
  cfg.indenter.motion.hold = s.hold;
  mpm::set_press_start(cfg, s.offset_x, s.offset_y, s.clearance);
  cfg.validate();
}

json scenario_meta(const ScenarioSpec& s, const GenConfig& g, std::uint64_t seed) {
  json frame_times = json::array();
  for (int t = 0; t < g.frames; ++t) frame_times.push_back(t * g.frame_dt);
  return json{
      {"id", s.id},
      {"offset", {s.offset_x, s.offset_y}},
      {"depth", s.depth},
      {"speed", s.speed},
      {"hold", s.hold},
      {"clearance", s.clearance},
      {"holdout", s.holdout},
      {"frames", g.frames},
      {"frame_dt", g.frame_dt},
      {"frame_times", frame_times},
      {"seed", seed},
      {"fine", {{"particles", g.fine.particle_count(mpm::Resolution::Fine)},
                {"dx", g.fine.dx}}},
      {"coarse", {{"particles", g.coarse.particle_count(mpm::Resolution::Coarse)},
                  {"dx", g.coarse.dx}}},
  };
}

void run_one(const mpm::SimConfig& cfg, mpm::Resolution res, std::uint64_t seed,
             double frame_dt, int frames, const std::string& path) {
  mpm::Simulation sim(cfg, res, seed);
  io::TrajWriter writer(path, sim.state.size(), frame_dt, cfg.dx, cfg.grid_dims,
                        cfg.grid_origin());
  mpm::run_press_scenario(sim, frame_dt, frames,
                          [&](const mpm::FullState& st, const Pose& pose) {
                            writer.write_frame(st, pose);
                          });
  writer.close();
}

std::vector<Vec3> frame_positions(const io::TrajFrame& f) {
  std::vector<Vec3> x(f.x.size() / 3);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = Vec3(f.x[3 * i], f.x[3 * i + 1], f.x[3 * i + 2]);
  return x;
}

}  // namespace

GenConfig gen_config_from_json(const io::Cfg& c) {
  c.allow({"fine", "coarse", "frame_dt", "frames", "scenarios"});
  GenConfig g;
  g.fine = io::sim_config_from_json(c.child("fine"));
  g.coarse = io::sim_config_from_json(c.child("coarse"));
  g.frame_dt = c.num("frame_dt");
  g.frames = static_cast<int>(c.integer("frames"));
  if (!(g.frame_dt > 0.0)) c.fail("frame_dt must be positive");
  if (g.frames < 2) c.fail("need at least 2 frames per scenario");

  const json& arr = c.raw().at("scenarios");
  if (!arr.is_array() || arr.empty()) c.fail("scenarios must be a non-empty array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    io::Cfg sc(arr[i], c.path() + ".scenarios[" + std::to_string(i) + "]");
    ScenarioSpec s = scenario_from_json(sc);
    if (!ids.insert(s.id).second) sc.fail("duplicate scenario id: " + s.id);
    g.scenarios.push_back(std::move(s));
  }
  check_paired_configs(g, c);
  return g;
}

void generate_dataset(const GenConfig& cfg, const std::string& out_dir,
                      std::uint64_t seed, bool deterministic) {
  fs::create_directories(out_dir);
  std::vector<const ScenarioSpec*> completed;

  for (const ScenarioSpec& s : cfg.scenarios) {
    fs::path dir = fs::path(out_dir) / ("scenario_" + s.id);
    auto t0 = std::chrono::steady_clock::now();
    try {
      fs::create_directories(dir);
      mpm::SimConfig fine = cfg.fine;
      mpm::SimConfig coarse = cfg.coarse;
      apply_scenario(fine, s);
      apply_scenario(coarse, s);
      run_one(fine, mpm::Resolution::Fine, seed, cfg.frame_dt, cfg.frames,
              (dir / "fine.traj").string());
      run_one(coarse, mpm::Resolution::Coarse, seed, cfg.frame_dt, cfg.frames,
              (dir / "coarse.traj").string());
      std::ofstream meta(dir / "meta.json");
      meta << scenario_meta(s, cfg, seed).dump(2) << "\n";
      if (!meta) throw IoError("cannot write " + (dir / "meta.json").string());
    } catch (const NumericalError& e) {
      // A blown-up scenario is dropped; the rest of the dataset is usable.
      std::cerr << "scenario " << s.id << " failed: " << e.what() << "\n";
      fs::remove_all(dir);
      continue;
    }
    completed.push_back(&s);
    if (!deterministic) {
      double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cerr << "scenario " << s.id << " done in " << sec << " s\n";
    }
  }
  if (completed.empty()) throw NumericalError("every scenario failed; no dataset written");

  // Normalization statistics over the training (non-holdout) fine frames.
  rom::StateEncoding enc;
  rom::NormStats::Accumulator acc;
  for (const ScenarioSpec* s : completed) {
    if (s->holdout) continue;
    io::TrajReader reader((fs::path(out_dir) / ("scenario_" + s->id) / "fine.traj").string());
    if (enc.rest.empty()) enc.rest = frame_positions(reader.frame(0));
    for (std::uint64_t t = 0; t < reader.frame_count(); ++t)
      acc.add(enc.pack_frame(reader.frame(t)));
  }
  if (enc.rest.empty())
    throw ConfigError("dataset has no training scenarios (all marked holdout)");
  std::ofstream ns(fs::path(out_dir) / "norm_stats.json");
  ns << json(acc.finalize()).dump(2) << "\n";
  if (!ns) throw IoError("cannot write norm_stats.json in " + out_dir);
}

long Dataset::training_pairs() const {
  long n = 0;
  for (const auto& s : scenarios)
    if (!s.holdout) n += std::max(0, s.frames - 1);
  return n;
}

Dataset load_dataset(const std::string& dir) {
  std::vector<fs::path> dirs;
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir);
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && e.path().filename().string().rfind("scenario_", 0) == 0)
      dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw IoError("no scenario_* directories in " + dir);

  Dataset ds;
  json ns = io::load_json((fs::path(dir) / "norm_stats.json").string());
  ns.get_to(ds.norm);

  for (const fs::path& d : dirs) {
    json meta = io::load_json((d / "meta.json").string());
    LoadedScenario sc;
    sc.id = meta.at("id").get<std::string>();
    sc.holdout = meta.at("holdout").get<bool>();

    io::TrajReader fine((d / "fine.traj").string());
    io::TrajReader coarse((d / "coarse.traj").string());
    if (fine.frame_count() != coarse.frame_count())
      throw IoError("fine/coarse frame counts differ in " + d.string());
    sc.frames = static_cast<int>(fine.frame_count());
    if (ds.frame_dt == 0.0) ds.frame_dt = fine.header().dt;

    if (ds.enc.rest.empty()) ds.enc.rest = frame_positions(fine.frame(0));
    const int nf = ds.enc.particle_count();
    if (fine.header().particle_count != static_cast<std::uint64_t>(nf))
      throw IoError("scenario " + sc.id + " has a different fine particle count");

    // Coarse grid geometry, for moving coarse fields onto the fine layout.
    mpm::Grid geom;
    geom.dx = coarse.header().dx;
    for (int a = 0; a < 3; ++a) {
      geom.dims[a] = static_cast<int>(coarse.header().grid_dims[a]);
      geom.origin[a] = coarse.header().grid_origin[a];
    }
    std::vector<Vec3> coarse_rest = frame_positions(coarse.frame(0));
    const int nc = static_cast<int>(coarse_rest.size());

    sc.q.resize(12 * nf, sc.frames);
    sc.target_v.resize(3 * nf, sc.frames);
    sc.target_F.resize(9 * nf, sc.frames);
    sc.coarse_disp.resize(3 * nf, sc.frames);
    sc.poses.resize(sc.frames);

    for (int t = 0; t < sc.frames; ++t) {
      io::TrajFrame ff = fine.frame(t);
      io::TrajFrame cf = coarse.frame(t);
      if (std::memcmp(ff.pose, cf.pose, sizeof(ff.pose)) != 0)
        throw IoError("scenario " + sc.id + ": fine/coarse indenter poses diverge at frame " +
                      std::to_string(t));
      sc.poses[t] = ff.indenter_pose();
      sc.q.col(t) = ds.enc.pack_frame(ff).cast<float>();

      MatX src(15, nc);  // rows: disp, v, F
      for (int i = 0; i < nc; ++i) {
        for (int a = 0; a < 3; ++a) {
          src(a, i) = static_cast<double>(cf.x[3 * i + a]) - coarse_rest[i][a];
          src(3 + a, i) = cf.v[3 * i + a];
        }
        for (int k = 0; k < 9; ++k) src(6 + k, i) = cf.F[9 * i + k];
      }
      MatX dst = mpm::field_transfer(geom, coarse_rest, src, ds.enc.rest);
      sc.coarse_disp.col(t) = dst.middleRows(0, 3).reshaped().cast<float>();
      sc.target_v.col(t) = dst.middleRows(3, 3).reshaped().cast<float>();
      sc.target_F.col(t) = dst.middleRows(6, 9).reshaped().cast<float>();
    }
    ds.scenarios.push_back(std::move(sc));
  }
  return ds;
}

}  // namespace trom::train
