#pragma once

#include <vector>

#include "tactile_rom/mpm/grid.hpp"
#include "tactile_rom/mpm/indenter.hpp"
#include "tactile_rom/mpm/material.hpp"
#include "tactile_rom/mpm/state.hpp"

namespace trom::mpm {

// Per-thread scatter buffers. Threads own contiguous particle ranges in index
// order and the merge walks threads in order, so the per-node accumulation
// order equals the serial loop and results are bit-identical to it for any
// thread count.
struct ScatterWorkspace {
  std::vector<std::vector<double>> mass;
  std::vector<std::vector<Vec3>> vec;

  void ensure(std::size_t nodes, int threads);
};

// APIC particle-to-grid: node mass and momentum.
void p2g(const FullState& state, Grid& grid, ScatterWorkspace& ws);
// Straight-line reference, kept for tests and benchmarks.
void p2g_serial(const FullState& state, Grid& grid);

// Internal elastic forces scattered to the nodes (no BCs, no gravity).
void internal_forces(const FullState& state, const Grid& grid,
                     const MaterialParams& material, std::vector<Vec3>& force,
                     ScatterWorkspace& ws);
void internal_forces_serial(const FullState& state, const Grid& grid,
                            const MaterialParams& material, std::vector<Vec3>& force);

struct BoundaryBands;  // defined in sim.hpp

// Momentum -> velocity, force and gravity integration, then contact and wall
// projections. `force` must come from internal_forces on the same grid.
void grid_update(Grid& grid, const std::vector<Vec3>& force, double dt,
                 const Indenter& indenter, const Pose& pose, const Vec3& indenter_velocity,
                 const Vec3& gravity, const BoundaryBands& bands);

// Grid-to-particle gather: velocity, affine matrix, deformation gradient
// update, advection. Throws InversionError when any det(F) drops to zero.
void g2p(const Grid& grid, FullState& state, double dt);
void g2p_serial(const Grid& grid, FullState& state, double dt);

// Moves per-particle channel data (rows of `src_vals`, one column per
// particle) between particle sets through the background grid: a B-spline
// weighted average onto the nodes, then the same-kernel gather at `dst_pos`.
// Nodes no source particle touches contribute zeros, matching the solver's
// treatment of massless nodes.
MatX field_transfer(const Grid& geometry, const std::vector<Vec3>& src_pos,
                    const MatX& src_vals, const std::vector<Vec3>& dst_pos);

}  // namespace trom::mpm
