#pragma once

#include <cstddef>
#include <vector>

#include "tactile_rom/core/types.hpp"

namespace trom::mpm {

// Dense background grid. Node (i,j,k) sits at origin + dx*(i,j,k).
struct Grid {
  Vec3i dims{Vec3i::Zero()};  // node counts per axis
  double dx = 0.0;
  Vec3 origin{Vec3::Zero()};

  std::vector<double> mass;
  std::vector<Vec3> momentum;  // momentum after p2g, velocity after grid_update
  std::vector<Vec3> velocity;

  Grid() = default;
  Grid(const Vec3i& dims_, double dx_, const Vec3& origin_)
      : dims(dims_), dx(dx_), origin(origin_) {
    std::size_t n = node_count();
    mass.assign(n, 0.0);
    momentum.assign(n, Vec3::Zero());
    velocity.assign(n, Vec3::Zero());
  }

  std::size_t node_count() const {
    return static_cast<std::size_t>(dims.x()) * dims.y() * dims.z();
  }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims.y() + j) * dims.z() + k;
  }

  Vec3 node_position(int i, int j, int k) const {
    return origin + dx * Vec3(i, j, k);
  }

  void clear() {
    std::fill(mass.begin(), mass.end(), 0.0);
    std::fill(momentum.begin(), momentum.end(), Vec3::Zero());
    std::fill(velocity.begin(), velocity.end(), Vec3::Zero());
  }
};

}  // namespace trom::mpm
