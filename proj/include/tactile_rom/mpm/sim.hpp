#pragma once

#include <functional>
#include <string>

#include "tactile_rom/mpm/grid.hpp"
#include "tactile_rom/mpm/indenter.hpp"
#include "tactile_rom/mpm/material.hpp"
#include "tactile_rom/mpm/state.hpp"
#include "tactile_rom/mpm/transfer.hpp"

namespace trom::mpm {

enum class WallType { Sticky, Separate, Open };

struct BoundarySpec {
  WallType x_min = WallType::Separate;
  WallType x_max = WallType::Separate;
  WallType y_min = WallType::Separate;
  WallType y_max = WallType::Separate;
  WallType z_min = WallType::Sticky;
  WallType z_max = WallType::Open;
};

// Node-index bands (2 layers per wall) where wall conditions apply.
struct BoundaryBands {
  BoundarySpec spec;
  Vec3i dims{Vec3i::Zero()};
  int width = 2;
};

enum class Resolution { Coarse, Fine };

struct SimConfig {
  Vec3i grid_dims{Vec3i::Zero()};
  double dx = 0.0;
  double dt = 0.0;  // 0 -> cfl_factor * dx / sound_speed
  double cfl_factor = 0.5;
  long n_coarse = 10000;
  long n_fine = 100000;
  MaterialParams material =
      MaterialParams::from_young_poisson(1.19e5, 0.43, 1070.0);
  Indenter indenter;
  Vec3 elastomer_origin{Vec3::Zero()};
  Vec3 elastomer_extents{0.03, 0.03, 0.004};
  Vec3 gravity{Vec3::Zero()};
  BoundarySpec boundary;
  double contact_stiffness = 1e6;  // quadratic penetration penalty, see energy
  double seed_jitter = 0.2;

  long particle_count(Resolution r) const {
    return r == Resolution::Coarse ? n_coarse : n_fine;
  }

  Vec3 grid_origin() const;  // places the floor band under the elastomer
  double effective_dt() const;
  // Throws ConfigError on CFL violation or an elastomer outside the interior.
  void validate() const;
};

struct Simulation {
  SimConfig config;
  FullState state;
  Grid grid;
  ScatterWorkspace ws;
  std::vector<Vec3> force;
  BoundaryBands bands;
  long step_count = 0;

  // Seeds the particle lattice; identical (config, seed, resolution) tuples
  // produce identical states.
  Simulation(const SimConfig& cfg, Resolution res, std::uint64_t seed);

  double dt() const { return config.effective_dt(); }
  void step();            // one explicit step at the current time
  void advance_to(double t);  // steps until state.time reaches t (within dt)
};

// Potential energy terms of a free-standing state. `pose` only matters when
// `with_contact` is set. Contact penalty: 0.5 * k_c * phi^2 * V0 per
// penetrating particle.
struct EnergyBreakdown {
  double elastic = 0.0;
  double contact = 0.0;
  double gravity = 0.0;
  double total() const { return elastic + contact + gravity; }
};

EnergyBreakdown elastic_energy(const FullState& state, const MaterialParams& m,
                               const Indenter* indenter = nullptr,
                               const Pose& pose = Pose{}, double k_c = 0.0,
                               const Vec3& gravity = Vec3::Zero());

// d(total energy)/d(position). The elastic term does not depend on positions,
// so this is the contact + gravity part.
std::vector<Vec3> energy_position_gradient(const FullState& state,
                                          const Indenter* indenter, const Pose& pose,
                                          double k_c, const Vec3& gravity);

// Repositions the press so the indenter's lowest point sits `clearance`
// above the elastomer top face, offset from its center in xy.
void set_press_start(SimConfig& cfg, double offset_x, double offset_y,
                     double clearance);

using FrameSink = std::function<void(const FullState&, const Pose&)>;

// Runs the prescribed press and emits `n_frames` frames spaced `frame_dt`
// apart (frame 0 is the rest state at t=0). Substep counts are derived so
// frame times are hit exactly.
void run_press_scenario(Simulation& sim, double frame_dt, int n_frames,
                        const FrameSink& sink);

}  // namespace trom::mpm
