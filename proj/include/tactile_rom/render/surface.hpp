#pragma once

#include <vector>

#include "tactile_rom/core/types.hpp"

namespace trom::render {

// Top-face particle subset with per-point unit normals from local plane
// fits over the deformed positions. `spacing` is the nominal rest
// inter-particle distance used for membership and splat sizing.
struct SurfaceSet {
  std::vector<int> indices;
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  double spacing = 0.0;
};

// Selects particles whose rest height is within `spacing` of the face at
// `top_z`, then fits a plane through the k nearest surface neighbours of
// each point (current positions) and orients the normal so <n, orient> >= 0.
// Throws ConfigError when no particle qualifies.
SurfaceSet extract_surface(const std::vector<Vec3>& current, const std::vector<Vec3>& rest,
                           double top_z, double spacing, const Vec3& orient, int k_neighbors = 12);

}  // namespace trom::render
