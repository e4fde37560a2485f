#pragma once

#include <cstdint>
#include <vector>

#include "tactile_rom/core/types.hpp"
#include "tactile_rom/render/sensor.hpp"
#include "tactile_rom/render/surface.hpp"

namespace trom::render {

// Row-major depth image in metres with a per-pixel validity mask.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;

  double& at(int x, int y) { return depth[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return depth[static_cast<size_t>(y) * width + x]; }
  bool is_valid(int x, int y) const { return valid[static_cast<size_t>(y) * width + x] != 0; }
};

// Snell refraction of unit direction d_in at a surface with unit normal n0
// oriented against d_in; eta is the ratio of refractive indices across the
// interface. Returns false on total internal reflection. The output is unit
// length.
bool refract_direction(const Vec3& d_in, const Vec3& n0, double eta, Vec3& out);

// Depth read off the sensor plane for a surface point x_hat seen along the
// refracted direction d:
//   D = <n_s, x_hat> + (z_s - <n_s, x_hat>) / <n_s, d>.
// Throws NumericalError when d grazes the plane (|<n_s, d>| < 1e-9).
double apparent_depth(const Vec3& x_hat, const Vec3& d, const SensorConfig& sensor);

// Orthographic splat render: each surface point is refracted at its own
// fitted normal, traced to the sensor plane, and splatted as a disc whose
// radius covers the surface spacing; overlaps keep the depth closest to the
// sensor. Pin-holes are filled with the median of valid 5x5 neighbours when
// at least six exist; larger holes stay invalid. Throws NumericalError when
// no pixel receives a sample.
DepthMap render_depth_map(const SurfaceSet& surface, const SensorConfig& sensor);

}  // namespace trom::render
