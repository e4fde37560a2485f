#include "tactile_rom/mpm/sim.hpp"

#include <cmath>
#include <string>

#include "tactile_rom/core/error.hpp"

namespace trom::mpm {

Vec3 SimConfig::grid_origin() const {
  // Centered over the elastomer in x/y; the sticky floor band (2 node layers)
  // sits strictly below the elastomer bottom.
  Vec3 center = elastomer_origin + 0.5 * elastomer_extents;
  return Vec3(center.x() - 0.5 * dx * (grid_dims.x() - 1),
              center.y() - 0.5 * dx * (grid_dims.y() - 1),
              elastomer_origin.z() - 2.0 * dx);
}

double SimConfig::effective_dt() const {
  double bound = cfl_factor * dx / material.sound_speed();
  return dt > 0.0 ? dt : bound;
}

void SimConfig::validate() const {
  if (grid_dims.minCoeff() < 8) throw ConfigError("grid_dims must be at least 8 nodes per axis");
  if (!(dx > 0.0)) throw ConfigError("dx must be positive");
  if (!(cfl_factor > 0.0 && cfl_factor <= 1.0))
    throw ConfigError("cfl_factor must lie in (0, 1]");
  double bound = cfl_factor * dx / material.sound_speed();
  if (dt > bound * (1.0 + 1e-12)) {
    throw ConfigError("dt " + std::to_string(dt) + " violates the CFL bound " +
                      std::to_string(bound) + " (cfl_factor * dx / sound_speed)");
  }
  if (dt < 0.0) throw ConfigError("dt must be non-negative (0 selects the CFL default)");
  if (!(elastomer_extents.minCoeff() > 0.0))
    throw ConfigError("elastomer_extents must be positive");
  if (n_coarse <= 0 || n_fine <= 0) throw ConfigError("particle counts must be positive");
  if (contact_stiffness < 0.0) throw ConfigError("contact_stiffness must be non-negative");
  if (!(indenter.motion.speed > 0.0)) throw ConfigError("indenter speed must be positive");
  if (indenter.motion.depth < 0.0) throw ConfigError("indenter depth must be non-negative");

  Vec3 org = grid_origin();
  Vec3 lo = org + Vec3::Constant(1.5 * dx);
  Vec3 hi = org + dx * Vec3(grid_dims.x() - 1, grid_dims.y() - 1, grid_dims.z() - 1) -
            Vec3::Constant(1.5 * dx);
  Vec3 box_lo = elastomer_origin;
  Vec3 box_hi = elastomer_origin + elastomer_extents;
  for (int a = 0; a < 3; ++a) {
    if (box_lo[a] < lo[a] || box_hi[a] > hi[a])
      throw ConfigError("elastomer leaves the valid grid interior on axis " +
                        std::to_string(a));
  }
}

Simulation::Simulation(const SimConfig& cfg, Resolution res, std::uint64_t seed)
    : config(cfg) {
  config.validate();
  grid = Grid(config.grid_dims, config.dx, config.grid_origin());
  bands.spec = config.boundary;
  bands.dims = config.grid_dims;

  SeedParams sp;
  sp.origin = config.elastomer_origin;
  sp.extents = config.elastomer_extents;
  sp.count = config.particle_count(res);
  sp.jitter = config.seed_jitter;
  sp.density = config.material.density;
  Rng rng(seed);
  state = seed_box(sp, rng);
}

void Simulation::step() {
  double h = dt();
  Pose pose = config.indenter.pose_at(state.time);
  Vec3 vel = config.indenter.velocity_at(state.time);
  p2g(state, grid, ws);
  internal_forces(state, grid, config.material, force, ws);
  grid_update(grid, force, h, config.indenter, pose, vel, config.gravity, bands);
  try {
    g2p(grid, state, h);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " at step " + std::to_string(step_count) +
                         " (t = " + std::to_string(state.time) + " s)");
  }
  state.time += h;
  ++step_count;
}

void Simulation::advance_to(double t) {
  while (state.time + 0.5 * dt() < t) step();
}

EnergyBreakdown elastic_energy(const FullState& state, const MaterialParams& m,
                               const Indenter* indenter, const Pose& pose, double k_c,
                               const Vec3& gravity) {
  EnergyBreakdown e;
  for (const auto& p : state.particles) {
    e.elastic += p.volume0 * energy_density(p.F, m);
    if (indenter && k_c > 0.0) {
      double phi = indenter->sdf(p.x, pose);
      if (phi < 0.0) e.contact += 0.5 * k_c * phi * phi * p.volume0;
    }
    e.gravity -= p.mass * gravity.dot(p.x);
  }
  return e;
}

std::vector<Vec3> energy_position_gradient(const FullState& state,
                                          const Indenter* indenter, const Pose& pose,
                                          double k_c, const Vec3& gravity) {
  std::vector<Vec3> grad(state.size(), Vec3::Zero());
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto& p = state.particles[i];
    Vec3 g = -p.mass * gravity;
    if (indenter && k_c > 0.0) {
      double phi = indenter->sdf(p.x, pose);
      if (phi < 0.0) g += k_c * phi * p.volume0 * indenter->normal(p.x, pose);
    }
    grad[i] = g;
  }
  return grad;
}

void set_press_start(SimConfig& cfg, double offset_x, double offset_y,
                     double clearance) {
  Vec3 center = cfg.elastomer_origin + 0.5 * cfg.elastomer_extents;
  double top = cfg.elastomer_origin.z() + cfg.elastomer_extents.z();
  cfg.indenter.motion.start =
      Vec3(center.x() + offset_x, center.y() + offset_y,
           top + cfg.indenter.bottom_offset() + clearance);
}

void run_press_scenario(Simulation& sim, double frame_dt, int n_frames,
                        const FrameSink& sink) {
  if (!(frame_dt > 0.0)) throw ConfigError("frame_dt must be positive");
  if (n_frames < 0) throw ConfigError("frame count must be non-negative");
  if (n_frames == 0) return;

  sim.state.time = 0.0;
  sim.state.frame_index = 0;
  sink(sim.state, sim.config.indenter.pose_at(0.0));

  double base_dt = sim.dt();
  int n_sub = std::max(1, static_cast<int>(std::ceil(frame_dt / base_dt - 1e-9)));
  double sub_dt = frame_dt / n_sub;

  // Substeps run at a fixed dt <= the CFL default so frame times are exact.
  SimConfig saved = sim.config;
  sim.config.dt = sub_dt;
  for (int f = 1; f < n_frames; ++f) {
    for (int s = 0; s < n_sub; ++s) sim.step();
    sim.state.time = static_cast<double>(f) * frame_dt;  // cancel fp drift
    sim.state.frame_index = f;
    sink(sim.state, sim.config.indenter.pose_at(sim.state.time));
  }
  sim.config = saved;
}

}  // namespace trom::mpm
