#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "commands.hpp"
#include "tactile_rom/io/config.hpp"
#include "tactile_rom/io/depth_io.hpp"
#include "tactile_rom/io/traj.hpp"
#include "tactile_rom/latent/rollout.hpp"
#include "tactile_rom/render/metrics.hpp"
#include "tactile_rom/render/surface.hpp"
#include "tactile_rom/train/dataset.hpp"
#include "tactile_rom/train/train.hpp"
#include "train_config.hpp"

namespace trom::cli {

namespace {

namespace fs = std::filesystem;

struct SurfaceParams {
  double top_z = 0.0;
  double spacing = 0.0;
  int neighbors = 12;
  double unit = 1e-3;
};

SurfaceParams surface_params(const io::Cfg& c) {
  io::Cfg sc = c.child("surface");
  sc.allow({"top_z", "spacing", "neighbors"});
  SurfaceParams p;
  p.top_z = sc.num("top_z");
  p.spacing = sc.num("spacing");
  p.neighbors = static_cast<int>(sc.integer("neighbors", 12));
  p.unit = c.num("unit", 1e-3);
  if (!(p.unit > 0.0)) c.fail("unit must be positive");
  return p;
}

std::vector<Vec3> frame_positions(const io::TrajFrame& f) {
  std::vector<Vec3> p(f.x.size() / 3);
  for (size_t i = 0; i < p.size(); ++i)
    p[i] = Vec3(f.x[3 * i], f.x[3 * i + 1], f.x[3 * i + 2]);
  return p;
}

// Membership is decided by the rest layout, so compute indices once.
std::vector<int> surface_indices(const std::vector<Vec3>& rest, const SurfaceParams& p) {
  render::SurfaceSet s =
      render::extract_surface(rest, rest, p.top_z, p.spacing, Vec3(0, 0, 1), p.neighbors);
  return s.indices;
}

std::vector<Vec3> gather(const std::vector<Vec3>& x, const std::vector<int>& idx) {
  std::vector<Vec3> out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = x[idx[i]];
  return out;
}

double peak_rss_mb() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return static_cast<double>(u.ru_maxrss) / 1024.0;
}

int eval_trajectories(const io::Cfg& c, const Args& a) {
  c.allow({"test", "reference", "surface", "unit"});
  SurfaceParams p = surface_params(c);
  io::TrajReader test(c.str("test"));
  io::TrajReader ref(c.str("reference"));
  if (test.frame_count() == 0 || ref.frame_count() == 0)
    throw IoError("eval: empty trajectory");
  const std::uint64_t frames = std::min(test.frame_count(), ref.frame_count());

  std::vector<Vec3> rest_test = frame_positions(test.frame(0));
  std::vector<Vec3> rest_ref = frame_positions(ref.frame(0));
  std::vector<int> idx_test = surface_indices(rest_test, p);
  std::vector<int> idx_ref = surface_indices(rest_ref, p);

  std::ofstream csv(a.out + "/chamfer.csv");
  if (!csv) throw IoError("cannot open " + a.out + "/chamfer.csv for writing");
  csv << "frame,chamfer\n";
  double mean = 0.0;
  for (std::uint64_t t = 0; t < frames; ++t) {
    std::vector<Vec3> sa = gather(frame_positions(test.frame(t)), idx_test);
    std::vector<Vec3> sb = gather(frame_positions(ref.frame(t)), idx_ref);
    const double ch = render::chamfer_l2(sa, sb, p.unit);
    mean += ch;
    csv << t << "," << std::setprecision(17) << ch << "\n";
  }
  mean /= static_cast<double>(frames);

  nlohmann::json summary = {{"frames", frames}, {"mean_chamfer", mean}, {"unit", p.unit}};
  std::ofstream sf(a.out + "/chamfer_summary.json");
  if (!sf) throw IoError("cannot open " + a.out + "/chamfer_summary.json for writing");
  sf << summary.dump(2) << "\n";
  std::cout << "eval: mean surface chamfer " << mean << " over " << frames << " frames\n";
  return 0;
}

int eval_depth_dirs(const io::Cfg& c, const Args& a) {
  c.allow({"test", "reference"});
  const std::string dir_a = c.str("test");
  const std::string dir_b = c.str("reference");
  auto stems = [](const std::string& dir) {
    std::set<std::string> out;
    const std::string suffix = ".depth.f32";
    if (!fs::is_directory(dir)) throw IoError(dir + " is not a directory");
    for (const auto& e : fs::directory_iterator(dir)) {
      std::string name = e.path().filename().string();
      if (name.size() > suffix.size() &&
          name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
        out.insert(name.substr(0, name.size() - suffix.size()));
    }
    return out;
  };
  std::set<std::string> sa = stems(dir_a);
  std::set<std::string> sb = stems(dir_b);
  std::vector<std::string> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  if (common.empty()) throw IoError("eval: no common depth-map stems between directories");

  std::ofstream csv(a.out + "/image_metrics.csv");
  if (!csv) throw IoError("cannot open " + a.out + "/image_metrics.csv for writing");
  csv << "frame,ssim,psnr,mae,pixels,windows\n";
  double ssim = 0.0, psnr = 0.0, mae = 0.0;
  for (const std::string& stem : common) {
    render::DepthMap ma = io::load_depth_map(dir_a + "/" + stem);
    render::DepthMap mb = io::load_depth_map(dir_b + "/" + stem);
    render::ImageMetrics m = render::image_metrics(ma, mb);
    csv << stem << "," << std::setprecision(17) << m.ssim << "," << m.psnr << "," << m.mae
        << "," << m.n_pixels << "," << m.n_windows << "\n";
    ssim += m.ssim;
    psnr += m.psnr;
    mae += m.mae;
  }
  const double n = static_cast<double>(common.size());
  std::cout << "eval: " << common.size() << " depth maps, mean ssim " << ssim / n
            << ", psnr " << psnr / n << ", mae " << mae / n << "\n";
  return 0;
}

struct AblationRow {
  std::string variant;
  double train_s = 0.0;
  double rollout_s = 0.0;
  double rss_mb = 0.0;
  double chamfer = 0.0;
};

int eval_ablation(const io::Cfg& c, const Args& a) {
  c.allow({"dataset", "train", "rollout", "surface", "unit"});
  SurfaceParams p = surface_params(c);
  train::TrainConfig base = train_config_from_json(c.child("train"));
  base.seed = a.seed;
  base.deterministic = a.deterministic;
  latent::RolloutConfig rcfg = latent::rollout_config_from_json(c.child("rollout"));

  train::Dataset ds = train::load_dataset(c.str("dataset"));
  const train::LoadedScenario* truth = nullptr;
  std::string holdout_ids;
  for (const auto& sc : ds.scenarios) {
    if (!sc.holdout) continue;
    holdout_ids += holdout_ids.empty() ? sc.id : ", " + sc.id;
    if (sc.id == rcfg.scenario.id) truth = &sc;
  }
  if (!truth)
    throw ConfigError("rollout scenario \"" + rcfg.scenario.id +
                      "\" is not a holdout scenario of the dataset (holdouts: " +
                      (holdout_ids.empty() ? "none" : holdout_ids) + ")");
  if (rcfg.frames != truth->frames)
    throw ConfigError("rollout frame count " + std::to_string(rcfg.frames) +
                      " does not match the held-out scenario's " +
                      std::to_string(truth->frames));

  std::vector<int> surf = surface_indices(ds.enc.rest, p);
  std::vector<std::vector<Vec3>> truth_surf(truth->frames);
  for (int t = 0; t < truth->frames; ++t)
    truth_surf[t] = gather(ds.enc.positions(truth->q.col(t).cast<double>()), surf);

  // Upsampled-coarse baseline, for side-by-side comparison with the rows.
  {
    std::ofstream csv(a.out + "/baseline_chamfer.csv");
    if (!csv) throw IoError("cannot open " + a.out + "/baseline_chamfer.csv for writing");
    csv << "frame,chamfer\n";
    for (int t = 0; t < truth->frames; ++t) {
      std::vector<Vec3> base_pos(ds.enc.rest.size());
      for (size_t i = 0; i < base_pos.size(); ++i)
        base_pos[i] = ds.enc.rest[i] + Vec3(truth->coarse_disp(3 * i + 0, t),
                                            truth->coarse_disp(3 * i + 1, t),
                                            truth->coarse_disp(3 * i + 2, t));
      csv << t << "," << std::setprecision(17)
          << render::chamfer_l2(gather(base_pos, surf), truth_surf[t], p.unit) << "\n";
    }
  }

  struct Variant {
    std::string name;
    train::TrainConfig cfg;
  };
  std::vector<Variant> variants;
  variants.push_back({"full", base});
  variants.push_back({"no_physics", base});
  variants.back().cfg.consistency = false;
  variants.push_back({"no_multiscale", base});
  variants.back().cfg.weights.multiscale = 0.0;
  variants.push_back({"r16", base});
  variants.back().cfg.latent_dim = 16;

  std::vector<AblationRow> rows;
  for (const Variant& v : variants) {
    const std::string vdir = a.out + "/ablation/" + v.name;
    fs::create_directories(vdir);

    auto t0 = std::chrono::steady_clock::now();
    train::TrainResult res =
        train::train(ds, v.cfg, vdir + "/checkpoint.ckpt", vdir + "/train_log.csv");
    auto t1 = std::chrono::steady_clock::now();

    rom::Checkpoint ck;
    ck.net = res.net;
    ck.norm = res.norm;
    latent::RolloutResult roll = latent::run_rollout(
        rcfg, ck, a.seed, a.deterministic, vdir + "/rollout.traj", vdir + "/rollout_stats.json");
    auto t2 = std::chrono::steady_clock::now();
    (void)roll;

    io::TrajReader pred(vdir + "/rollout.traj");
    if (pred.frame_count() != static_cast<std::uint64_t>(truth->frames))
      throw IoError(vdir + "/rollout.traj: unexpected frame count");
    std::ofstream csv(vdir + "/chamfer.csv");
    if (!csv) throw IoError("cannot open " + vdir + "/chamfer.csv for writing");
    csv << "frame,chamfer\n";
    double mean = 0.0;
    for (int t = 0; t < truth->frames; ++t) {
      std::vector<Vec3> sp = gather(frame_positions(pred.frame(t)), surf);
      const double ch = render::chamfer_l2(sp, truth_surf[t], p.unit);
      mean += ch;
      csv << t << "," << std::setprecision(17) << ch << "\n";
    }
    mean /= static_cast<double>(truth->frames);

    AblationRow row;
    row.variant = v.name;
    row.train_s = a.deterministic ? 0.0 : std::chrono::duration<double>(t1 - t0).count();
    row.rollout_s = a.deterministic ? 0.0 : std::chrono::duration<double>(t2 - t1).count();
    row.rss_mb = a.deterministic ? 0.0 : peak_rss_mb();
    row.chamfer = mean;
    rows.push_back(row);
  }

  std::ofstream csv(a.out + "/ablation.csv");
  if (!csv) throw IoError("cannot open " + a.out + "/ablation.csv for writing");
  csv << "variant,train_seconds,rollout_seconds,peak_rss_mb,chamfer\n";
  for (const auto& r : rows)
    csv << r.variant << "," << std::setprecision(17) << r.train_s << "," << r.rollout_s << ","
        << r.rss_mb << "," << r.chamfer << "\n";

  std::printf("%-14s %12s %12s %12s %14s\n", "variant", "train_s", "rollout_s", "rss_mb",
              "chamfer");
  for (const auto& r : rows)
    std::printf("%-14s %12.2f %12.2f %12.1f %14.6g\n", r.variant.c_str(), r.train_s,
                r.rollout_s, r.rss_mb, r.chamfer);
  return 0;
}

}  // namespace

int cmd_eval(const Args& a) {
  nlohmann::json j = io::load_json(a.config);
  io::Cfg c(j, a.config);
  c.allow({"trajectories", "depth_dirs", "ablation"});
  fs::create_directories(a.out);

  if (a.ablate) {
    if (!c.has("ablation")) c.fail("--ablate requires an \"ablation\" block");
    return eval_ablation(c.child("ablation"), a);
  }
  if (!c.has("trajectories") && !c.has("depth_dirs"))
    c.fail("need a \"trajectories\" or \"depth_dirs\" block");
  int rc = 0;
  if (c.has("trajectories")) rc = eval_trajectories(c.child("trajectories"), a);
  if (rc == 0 && c.has("depth_dirs")) rc = eval_depth_dirs(c.child("depth_dirs"), a);
  return rc;
}

}  // namespace trom::cli
