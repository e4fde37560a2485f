#pragma once

#include <array>

#include "tactile_rom/mpm/grid.hpp"

namespace trom::mpm {

// Quadratic B-spline weights over the 3x3x3 node block starting at `base`.
// w[axis][offset] are 1-D weights, dw their derivatives (already / dx).
struct KernelWeights {
  Vec3i base{Vec3i::Zero()};
  double w[3][3];
  double dw[3][3];

  double weight(int i, int j, int k) const { return w[0][i] * w[1][j] * w[2][k]; }

  Vec3 grad(int i, int j, int k) const {
    return Vec3(dw[0][i] * w[1][j] * w[2][k],
                w[0][i] * dw[1][j] * w[2][k],
                w[0][i] * w[1][j] * dw[2][k]);
  }
};

// Throws OutOfDomainError unless the position keeps the full 3x3x3 support
// inside the grid (at least ~1.5 dx from the boundary). `particle` only
// labels the error message.
KernelWeights bspline_weights(const Vec3& pos, const Grid& grid, long particle = -1);

}  // namespace trom::mpm
