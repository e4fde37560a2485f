#pragma once

#include <string>
#include <vector>

#include "tactile_rom/io/config.hpp"
#include "tactile_rom/mpm/sim.hpp"
#include "tactile_rom/rom/encoding.hpp"

namespace trom::train {

// One press: indenter xy offset from the elastomer center plus depth/speed.
struct ScenarioSpec {
  std::string id;
  double offset_x = 0.0;
  double offset_y = 0.0;
  double depth = 3e-4;
  double speed = 2e-3;
  double hold = 1.0;
  double clearance = 0.0;
  bool holdout = false;
};

struct GenConfig {
  mpm::SimConfig fine;
  mpm::SimConfig coarse;
  double frame_dt = 4e-3;
  int frames = 60;
  std::vector<ScenarioSpec> scenarios;
};

GenConfig gen_config_from_json(const io::Cfg& c);

// Runs every scenario at both resolutions with the identical prescribed
// indenter motion and writes scenario_<id>/{fine.traj, coarse.traj,
// meta.json} plus norm_stats.json gathered over the non-holdout fine frames.
// All scenarios share `seed` so the particle layout (and hence the network's
// input ordering) is fixed across the dataset.
void generate_dataset(const GenConfig& cfg, const std::string& out_dir,
                      std::uint64_t seed, bool deterministic);

// A scenario loaded for training/eval. Columns are frames. `q` holds the
// packed fine state (displacement + F, physical units); the target_* fields
// hold the coarse solver's fields moved onto the fine rest layout through the
// coarse grid; `coarse_disp` is the same transfer of coarse displacement,
// which doubles as the upsampled-baseline prediction.
struct LoadedScenario {
  std::string id;
  bool holdout = false;
  int frames = 0;
  Eigen::MatrixXf q;            // 12N x frames
  Eigen::MatrixXf target_v;     // 3N x frames
  Eigen::MatrixXf target_F;     // 9N x frames
  Eigen::MatrixXf coarse_disp;  // 3N x frames
  std::vector<Pose> poses;      // indenter pose per frame
};

struct Dataset {
  rom::StateEncoding enc;  // fine rest layout, from frame 0
  rom::NormStats norm;
  double frame_dt = 0.0;
  std::vector<LoadedScenario> scenarios;

  int dim() const { return enc.dim(); }
  long training_pairs() const;  // (t-1, t) pairs over non-holdout scenarios
};

Dataset load_dataset(const std::string& dir);

}  // namespace trom::train
