#pragma once

#include <cmath>

#include "tactile_rom/core/error.hpp"
#include "tactile_rom/core/types.hpp"

namespace trom::render {

// Orthographic depth sensor behind a refractive gel window. `normal` (n_s)
// and `plane_offset` (z_s) fix the sensor plane {p : <n_s, p> = z_s};
// `interface_normal` (n0) is the nominal gel window normal used as a
// fallback when a surface point has no reliable fitted normal. Pixel (0,0)
// sits at `origin`; the in-plane axes are derived from `normal`.
struct SensorConfig {
  Vec3 normal{0.0, 0.0, 1.0};
  double plane_offset = 0.0;
  Vec3 interface_normal{0.0, 0.0, 1.0};
  double eta = 1.0 / 1.4;
  int width = 320;
  int height = 240;
  double pitch = 1e-4;
  Vec3 origin{Vec3::Zero()};

  void validate() const {
    if (std::abs(normal.norm() - 1.0) > 1e-12)
      throw ConfigError("sensor normal must be unit length");
    if (std::abs(interface_normal.norm() - 1.0) > 1e-12)
      throw ConfigError("interface normal must be unit length");
    if (!(eta > 0.0)) throw ConfigError("eta must be positive");
    if (!(pitch > 0.0)) throw ConfigError("pixel pitch must be positive");
    if (width < 1 || height < 1) throw ConfigError("sensor resolution must be positive");
  }

  // Deterministic in-plane basis: u is the most orthogonal world axis
  // projected into the plane, v completes the right-handed frame.
  void basis(Vec3& u, Vec3& v) const {
    Vec3 seed = std::abs(normal.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
    u = (seed - normal * normal.dot(seed)).normalized();
    v = normal.cross(u);
  }
};

}  // namespace trom::render
