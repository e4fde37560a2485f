#include "tactile_rom/mpm/transfer.hpp"

#include <string>

#include "tactile_rom/core/error.hpp"
#include "tactile_rom/core/parallel.hpp"
#include "tactile_rom/mpm/kernel.hpp"
#include "tactile_rom/mpm/sim.hpp"

namespace trom::mpm {

namespace {
constexpr double kMassEps = 1e-12;  // kg; lighter nodes are skipped
}

void ScatterWorkspace::ensure(std::size_t nodes, int threads) {
  if (mass.size() != static_cast<std::size_t>(threads) ||
      (threads > 0 && mass[0].size() != nodes)) {
    mass.assign(threads, std::vector<double>(nodes, 0.0));
    vec.assign(threads, std::vector<Vec3>(nodes, Vec3::Zero()));
  } else {
    for (auto& b : mass) std::fill(b.begin(), b.end(), 0.0);
    for (auto& b : vec) std::fill(b.begin(), b.end(), Vec3::Zero());
  }
}

void p2g_serial(const FullState& state, Grid& grid) {
  grid.clear();
  for (std::size_t p = 0; p < state.size(); ++p) {
    const ParticleState& pt = state.particles[p];
    KernelWeights kw = bspline_weights(pt.x, grid, static_cast<long>(p));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          double w = kw.weight(i, j, k);
          std::size_t g = grid.index(kw.base.x() + i, kw.base.y() + j, kw.base.z() + k);
          Vec3 xg = grid.node_position(kw.base.x() + i, kw.base.y() + j, kw.base.z() + k);
          grid.mass[g] += w * pt.mass;
          grid.momentum[g] += w * pt.mass * (pt.v + pt.C * (xg - pt.x));
        }
  }
}

void p2g(const FullState& state, Grid& grid, ScatterWorkspace& ws) {
  grid.clear();
  const std::size_t n = state.size();
  const std::size_t nodes = grid.node_count();
  const int nt = max_threads();
  ws.ensure(nodes, nt);
  std::exception_ptr err = nullptr;

#pragma omp parallel num_threads(nt)
  {
    const int tid = thread_id();
    Range r = static_partition(n, tid, nt);
    auto& bm = ws.mass[tid];
    auto& bv = ws.vec[tid];
    try {
      for (std::size_t p = r.begin; p < r.end; ++p) {
        const ParticleState& pt = state.particles[p];
        KernelWeights kw = bspline_weights(pt.x, grid, static_cast<long>(p));
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
              double w = kw.weight(i, j, k);
              std::size_t g = grid.index(kw.base.x() + i, kw.base.y() + j, kw.base.z() + k);
              Vec3 xg = grid.node_position(kw.base.x() + i, kw.base.y() + j, kw.base.z() + k);
              bm[g] += w * pt.mass;
              bv[g] += w * pt.mass * (pt.v + pt.C * (xg - pt.x));
            }
      }
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
#pragma omp barrier
#pragma omp for schedule(static)
    for (long g = 0; g < static_cast<long>(nodes); ++g) {
      double m = 0.0;
      Vec3 mom = Vec3::Zero();
      for (int t = 0; t < nt; ++t) {
        m += ws.mass[t][g];
        mom += ws.vec[t][g];
      }
      grid.mass[g] = m;
      grid.momentum[g] = mom;
    }
  }
  if (err) std::rethrow_exception(err);
}

void internal_forces_serial(const FullState& state, const Grid& grid,
                            const MaterialParams& material, std::vector<Vec3>& force) {
  force.assign(grid.node_count(), Vec3::Zero());
  for (std::size_t p = 0; p < state.size(); ++p) {
    const ParticleState& pt = state.particles[p];
    KernelWeights kw = bspline_weights(pt.x, grid, static_cast<long>(p));
    Mat3 G = pt.volume0 * pk1_stress(pt.F, material) * pt.F.transpose();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          std::size_t g = grid.index(kw.base.x() + i, kw.base.y() + j, kw.base.z() + k);
          force[g] -= G * kw.grad(i, j, k);
        }
  }
}

void internal_forces(const FullState& state, const Grid& grid,
                     const MaterialParams& material, std::vector<Vec3>& force,
                     ScatterWorkspace& ws) {
  force.assign(grid.node_count(), Vec3::Zero());
  const std::size_t n = state.size();
  const std::size_t nodes = grid.node_count();
  const int nt = max_threads();
  ws.ensure(nodes, nt);

  std::exception_ptr err = nullptr;
#pragma omp parallel num_threads(nt)
  {
    const int tid = thread_id();
    Range r = static_partition(n, tid, nt);
    auto& bv = ws.vec[tid];
    try {
      for (std::size_t p = r.begin; p < r.end; ++p) {
        const ParticleState& pt = state.particles[p];
        KernelWeights kw = bspline_weights(pt.x, grid, static_cast<long>(p));
        Mat3 G = pt.volume0 * pk1_stress(pt.F, material) * pt.F.transpose();
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
              std::size_t g = grid.index(kw.base.x() + i, kw.base.y() + j, kw.base.z() + k);
              bv[g] -= G * kw.grad(i, j, k);
            }
      }
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
#pragma omp barrier
#pragma omp for schedule(static)
    for (long g = 0; g < static_cast<long>(nodes); ++g) {
      Vec3 f = Vec3::Zero();
      for (int t = 0; t < nt; ++t) f += ws.vec[t][g];
      force[g] = f;
    }
  }
  if (err) std::rethrow_exception(err);
}

void grid_update(Grid& grid, const std::vector<Vec3>& force, double dt,
                 const Indenter& indenter, const Pose& pose, const Vec3& indenter_velocity,
                 const Vec3& gravity, const BoundaryBands& bands) {
  const Vec3i dims = grid.dims;
  const int bw = bands.width;
  const BoundarySpec& bc = bands.spec;

#pragma omp parallel for schedule(static) collapse(2)
  for (int i = 0; i < dims.x(); ++i)
    for (int j = 0; j < dims.y(); ++j)
      for (int k = 0; k < dims.z(); ++k) {
        std::size_t g = grid.index(i, j, k);
        if (grid.mass[g] < kMassEps) {
          grid.velocity[g] = Vec3::Zero();
          continue;
        }
        Vec3 v = grid.momentum[g] / grid.mass[g];
        v += dt * (force[g] / grid.mass[g] + gravity);

        // Indenter contact: project node velocities inside the body.
        Vec3 xg = grid.node_position(i, j, k);
        if (indenter.sdf(xg, pose) < 0.0) {
          if (indenter.contact == ContactModel::Sticky) {
            v = indenter_velocity;
          } else {
            Vec3 n = indenter.normal(xg, pose);
            Vec3 rel = v - indenter_velocity;
            double vn = rel.dot(n);
            if (vn < 0.0) {
              Vec3 vt = rel - vn * n;
              double vt_norm = vt.norm();
              double scale =
                  vt_norm > 1e-14
                      ? std::max(0.0, 1.0 - indenter.friction * (-vn) / vt_norm)
                      : 0.0;
              v = indenter_velocity + vt * scale;
            }
          }
        }

        // Domain walls.
        auto wall = [&](WallType type, int axis, bool min_side) {
          if (type == WallType::Open) return;
          if (type == WallType::Sticky) {
            v = Vec3::Zero();
            return;
          }
          // Separate: remove the inward-pointing normal component.
          if (min_side && v[axis] < 0.0) v[axis] = 0.0;
          if (!min_side && v[axis] > 0.0) v[axis] = 0.0;
        };
        if (i < bw) wall(bc.x_min, 0, true);
        if (i >= dims.x() - bw) wall(bc.x_max, 0, false);
        if (j < bw) wall(bc.y_min, 1, true);
        if (j >= dims.y() - bw) wall(bc.y_max, 1, false);
        if (k < bw) wall(bc.z_min, 2, true);
        if (k >= dims.z() - bw) wall(bc.z_max, 2, false);

        grid.velocity[g] = v;
      }
}

namespace {

template <bool kParallel>
void g2p_impl(const Grid& grid, FullState& state, double dt) {
  const double inv_dx2 = 4.0 / (grid.dx * grid.dx);
  const long n = static_cast<long>(state.size());
  std::exception_ptr err = nullptr;

#pragma omp parallel for schedule(static) if (kParallel)
  for (long p = 0; p < n; ++p) {
    try {
      ParticleState& pt = state.particles[p];
      KernelWeights kw = bspline_weights(pt.x, grid, p);
      Vec3 v_new = Vec3::Zero();
      Mat3 B = Mat3::Zero();       // APIC first moment
      Mat3 grad_v = Mat3::Zero();  // true velocity gradient
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) {
            double w = kw.weight(i, j, k);
            std::size_t g = grid.index(kw.base.x() + i, kw.base.y() + j, kw.base.z() + k);
            Vec3 xg = grid.node_position(kw.base.x() + i, kw.base.y() + j, kw.base.z() + k);
            const Vec3& vg = grid.velocity[g];
            v_new += w * vg;
            B += w * vg * (xg - pt.x).transpose();
            grad_v += vg * kw.grad(i, j, k).transpose();
          }
      pt.v = v_new;
      pt.C = B * inv_dx2;
      pt.F = (Mat3::Identity() + dt * grad_v) * pt.F;
      if (!(pt.F.determinant() > 0.0)) {
        throw InversionError("particle " + std::to_string(p) +
                             " inverted during g2p (det(F) <= 0)");
      }
      pt.x += dt * pt.v;
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace

void g2p(const Grid& grid, FullState& state, double dt) {
  g2p_impl<true>(grid, state, dt);
}

void g2p_serial(const Grid& grid, FullState& state, double dt) {
  g2p_impl<false>(grid, state, dt);
}

MatX field_transfer(const Grid& geometry, const std::vector<Vec3>& src_pos,
                    const MatX& src_vals, const std::vector<Vec3>& dst_pos) {
  if (src_vals.cols() != static_cast<Eigen::Index>(src_pos.size()))
    throw ShapeError("field_transfer: one value column per source particle required");
  const Eigen::Index channels = src_vals.rows();
  const std::size_t nodes = geometry.node_count();

  MatX node_vals = MatX::Zero(channels, static_cast<Eigen::Index>(nodes));
  std::vector<double> weight_sum(nodes, 0.0);
  for (std::size_t p = 0; p < src_pos.size(); ++p) {
    KernelWeights kw = bspline_weights(src_pos[p], geometry, static_cast<long>(p));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          double w = kw.weight(i, j, k);
          std::size_t n = geometry.index(kw.base.x() + i, kw.base.y() + j, kw.base.z() + k);
          node_vals.col(static_cast<Eigen::Index>(n)) += w * src_vals.col(p);
          weight_sum[n] += w;
        }
  }
  for (std::size_t n = 0; n < nodes; ++n)
    if (weight_sum[n] > 0.0) node_vals.col(static_cast<Eigen::Index>(n)) /= weight_sum[n];

  MatX out = MatX::Zero(channels, static_cast<Eigen::Index>(dst_pos.size()));
  for (std::size_t p = 0; p < dst_pos.size(); ++p) {
    KernelWeights kw = bspline_weights(dst_pos[p], geometry, static_cast<long>(p));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          std::size_t n = geometry.index(kw.base.x() + i, kw.base.y() + j, kw.base.z() + k);
          out.col(static_cast<Eigen::Index>(p)) +=
              kw.weight(i, j, k) * node_vals.col(static_cast<Eigen::Index>(n));
        }
  }
  return out;
}

}  // namespace trom::mpm
