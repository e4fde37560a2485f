#pragma once

#include <string>
#include <vector>

#include "tactile_rom/io/config.hpp"
#include "tactile_rom/latent/lbfgs.hpp"
#include "tactile_rom/rom/checkpoint.hpp"
#include "tactile_rom/train/dataset.hpp"

namespace trom::latent {

enum class WarmStart { Previous, EncodeCoarse };

struct RolloutConfig {
  std::string checkpoint;
  mpm::SimConfig fine;    // rest layout, masses, material, contact stiffness
  mpm::SimConfig coarse;  // lockstep low-resolution solver
  train::ScenarioSpec scenario;
  double frame_dt = 4e-3;
  int frames = 60;
  LbfgsSettings lbfgs;
  WarmStart warm_start = WarmStart::Previous;
};

RolloutConfig rollout_config_from_json(const io::Cfg& c);

struct FrameStats {
  int frame = 0;
  double objective = 0.0;
  double warm_objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool stalled = false;
  double wall_ms = 0.0;
};

struct RolloutResult {
  std::vector<FrameStats> stats;
};

// Per frame: advance the coarse solver to the frame time, anchor the latent
// objective to the previous decoded state propagated inertially, warm-start
// z, minimize, and write the decoded fine state. Output: a trajectory file
// plus a JSON sidecar with the per-frame solve statistics. Stalled frames are
// reported in the sidecar, not fatal. wall_ms is zeroed when `deterministic`.
RolloutResult run_rollout(const RolloutConfig& cfg, const rom::Checkpoint& ck,
                          std::uint64_t seed, bool deterministic,
                          const std::string& out_traj, const std::string& out_sidecar);

}  // namespace trom::latent
