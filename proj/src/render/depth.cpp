#include "tactile_rom/render/depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tactile_rom/core/error.hpp"

namespace trom::render {

bool refract_direction(const Vec3& d_in, const Vec3& n0, double eta, Vec3& out) {
  const double c1 = -n0.dot(d_in);
  const double k = 1.0 - eta * eta * (1.0 - c1 * c1);
  if (k < 0.0) return false;
  const double c2 = std::sqrt(k);
  out = eta * d_in + (eta * c1 - c2) * n0;
  out.normalize();
  return true;
}

double apparent_depth(const Vec3& x_hat, const Vec3& d, const SensorConfig& sensor) {
  const double along = sensor.normal.dot(d);
  if (std::abs(along) < 1e-9)
    throw NumericalError("apparent depth undefined: ray grazes the sensor plane");
  const double h = sensor.normal.dot(x_hat);
  return h + (sensor.plane_offset - h) / along;
}

DepthMap render_depth_map(const SurfaceSet& surface, const SensorConfig& sensor) {
  sensor.validate();
  DepthMap map;
  map.width = sensor.width;
  map.height = sensor.height;
  map.depth.assign(static_cast<size_t>(map.width) * map.height,
                   std::numeric_limits<double>::quiet_NaN());
  map.valid.assign(map.depth.size(), 0);

  Vec3 axis_u, axis_v;
  sensor.basis(axis_u, axis_v);
  const Vec3 d_in = -sensor.normal;
  const double radius_px = std::max(1.0, std::ceil(0.75 * surface.spacing / sensor.pitch));
  const double r2 = radius_px * radius_px;

  size_t tir = 0, grazing = 0, off_image = 0;
  for (size_t i = 0; i < surface.positions.size(); ++i) {
    Vec3 d;
    if (!refract_direction(d_in, surface.normals[i], sensor.eta, d)) {
      ++tir;
      continue;
    }
    const double along = sensor.normal.dot(d);
    if (std::abs(along) < 1e-9) {
      ++grazing;
      continue;
    }
    const Vec3& x = surface.positions[i];
    const double value = apparent_depth(x, d, sensor);
    const double s = (sensor.plane_offset - sensor.normal.dot(x)) / along;
    const Vec3 hit = x + s * d - sensor.origin;
    const double px = hit.dot(axis_u) / sensor.pitch;
    const double py = hit.dot(axis_v) / sensor.pitch;

    const int x0 = std::max(0, static_cast<int>(std::floor(px - radius_px)));
    const int x1 = std::min(map.width - 1, static_cast<int>(std::floor(px + radius_px)));
    const int y0 = std::max(0, static_cast<int>(std::floor(py - radius_px)));
    const int y1 = std::min(map.height - 1, static_cast<int>(std::floor(py + radius_px)));
    if (x0 > x1 || y0 > y1) {
      ++off_image;
      continue;
    }
    bool touched = false;
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix) {
        const double dx = ix + 0.5 - px;
        const double dy = iy + 0.5 - py;
        if (dx * dx + dy * dy > r2) continue;
        touched = true;
        const size_t idx = static_cast<size_t>(iy) * map.width + ix;
        if (!map.valid[idx] || value < map.depth[idx]) {
          map.depth[idx] = value;
          map.valid[idx] = 1;
        }
      }
    if (!touched) ++off_image;
  }

  size_t n_valid = 0;
  for (auto v : map.valid) n_valid += v;
  if (n_valid == 0)
    throw NumericalError("depth render produced no valid pixel (" +
                         std::to_string(surface.positions.size()) + " points, " +
                         std::to_string(tir) + " total internal reflection, " +
                         std::to_string(grazing) + " grazing, " + std::to_string(off_image) +
                         " outside the image)");

  // Single median-fill pass over the pre-fill mask: pin-holes up to ~2 px
  // across gain values, larger holes keep an invalid core.
  std::vector<std::uint8_t> before = map.valid;
  std::vector<double> patch;
  patch.reserve(25);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) {
      const size_t idx = static_cast<size_t>(y) * map.width + x;
      if (before[idx]) continue;
      patch.clear();
      for (int iy = std::max(0, y - 2); iy <= std::min(map.height - 1, y + 2); ++iy)
        for (int ix = std::max(0, x - 2); ix <= std::min(map.width - 1, x + 2); ++ix) {
          const size_t j = static_cast<size_t>(iy) * map.width + ix;
          if (before[j]) patch.push_back(map.depth[j]);
        }
      if (patch.size() < 6) continue;
      auto mid = patch.begin() + patch.size() / 2;
      std::nth_element(patch.begin(), mid, patch.end());
      double med = *mid;
      if (patch.size() % 2 == 0) {
        double lo = *std::max_element(patch.begin(), mid);
        med = 0.5 * (lo + med);
      }
      map.depth[idx] = med;
      map.valid[idx] = 1;
    }
  return map;
}

}  // namespace trom::render
