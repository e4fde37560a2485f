#include "tactile_rom/mpm/indenter.hpp"

#include <algorithm>
#include <cmath>

#include "tactile_rom/core/error.hpp"

namespace trom::mpm {

namespace {

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double box_sdf(const Vec3& local, const Vec3& half_extents) {
  Vec3 q = local.cwiseAbs() - half_extents;
  Vec3 q_out = q.cwiseMax(0.0);
  double inside = std::min(q.maxCoeff(), 0.0);
  return q_out.norm() + inside;
}

}  // namespace

double SdfGrid::sample(const Vec3& p) const {
  if (values.empty()) throw ConfigError("mesh SDF grid is empty");
  Vec3 g = (p - origin) / dx;
  double x = clampd(g.x(), 0.0, dims.x() - 1.001);
  double y = clampd(g.y(), 0.0, dims.y() - 1.001);
  double z = clampd(g.z(), 0.0, dims.z() - 1.001);
  int i = static_cast<int>(x), j = static_cast<int>(y), k = static_cast<int>(z);
  double fx = x - i, fy = y - j, fz = z - k;
  auto v = [&](int a, int b, int c) { return static_cast<double>(values[index(a, b, c)]); };
  double c00 = v(i, j, k) * (1 - fx) + v(i + 1, j, k) * fx;
  double c10 = v(i, j + 1, k) * (1 - fx) + v(i + 1, j + 1, k) * fx;
  double c01 = v(i, j, k + 1) * (1 - fx) + v(i + 1, j, k + 1) * fx;
  double c11 = v(i, j + 1, k + 1) * (1 - fx) + v(i + 1, j + 1, k + 1) * fx;
  double c0 = c00 * (1 - fy) + c10 * fy;
  double c1 = c01 * (1 - fy) + c11 * fy;
  return c0 * (1 - fz) + c1 * fz;
}

Vec3 SdfGrid::gradient(const Vec3& p) const {
  double h = 0.5 * dx;
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    Vec3 lo = p, hi = p;
    lo[a] -= h;
    hi[a] += h;
    g[a] = (sample(hi) - sample(lo)) / (2.0 * h);
  }
  return g;
}

Pose Indenter::pose_at(double t) const {
  double drop = motion.speed * std::min(std::max(t, 0.0), motion.travel_time());
  Pose pose;
  pose.position = motion.start - Vec3(0.0, 0.0, drop);
  return pose;
}

Vec3 Indenter::velocity_at(double t) const {
  if (t >= 0.0 && t < motion.travel_time()) return Vec3(0.0, 0.0, -motion.speed);
  return Vec3::Zero();
}

double Indenter::sdf(const Vec3& p, const Pose& pose) const {
  Vec3 local = pose.orientation.conjugate() * (p - pose.position);
  switch (shape) {
    case SdfShape::Sphere:
      return local.norm() - radius;
    case SdfShape::Box:
      return box_sdf(local, half_extents);
    case SdfShape::MeshGrid:
      return mesh.sample(local);
  }
  return 1e30;
}

Vec3 Indenter::normal(const Vec3& p, const Pose& pose) const {
  Vec3 local = pose.orientation.conjugate() * (p - pose.position);
  Vec3 n_local;
  switch (shape) {
    case SdfShape::Sphere: {
      double len = local.norm();
      n_local = len > 1e-14 ? Vec3(local / len) : Vec3(0.0, 0.0, 1.0);
      break;
    }
    case SdfShape::Box: {
      // Central differences on the exact box SDF; edges are measure-zero and
      // the contact projection only needs a direction.
      double h = 1e-7;
      for (int a = 0; a < 3; ++a) {
        Vec3 lo = local, hi = local;
        lo[a] -= h;
        hi[a] += h;
        n_local[a] = box_sdf(hi, half_extents) - box_sdf(lo, half_extents);
      }
      double len = n_local.norm();
      n_local = len > 1e-14 ? Vec3(n_local / len) : Vec3(0.0, 0.0, 1.0);
      break;
    }
    case SdfShape::MeshGrid: {
      Vec3 g = mesh.gradient(local);
      double len = g.norm();
      n_local = len > 1e-14 ? Vec3(g / len) : Vec3(0.0, 0.0, 1.0);
      break;
    }
  }
  return pose.orientation * n_local;
}

double Indenter::bottom_offset() const {
  switch (shape) {
    case SdfShape::Sphere:
      return radius;
    case SdfShape::Box:
      return half_extents.z();
    case SdfShape::MeshGrid: {
      // Lowest zero crossing along -z under the local origin, found by probe.
      double lo = 0.0, hi = mesh.dims.z() * mesh.dx;
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mesh.sample(Vec3(0, 0, -mid)) < 0.0)
          lo = mid;
        else
          hi = mid;
      }
      return lo;
    }
  }
  return 0.0;
}

SdfGrid make_sphere_sdf_grid(double radius, double dx, double margin) {
  SdfGrid g;
  double half = radius + margin;
  int n = static_cast<int>(std::ceil(2.0 * half / dx)) + 1;
  g.dims = Vec3i(n, n, n);
  g.dx = dx;
  g.origin = Vec3(-half, -half, -half);
  g.values.resize(g.index(n - 1, n - 1, n - 1) + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Vec3 p = g.origin + dx * Vec3(i, j, k);
        g.values[g.index(i, j, k)] = static_cast<float>(p.norm() - radius);
      }
  return g;
}

}  // namespace trom::mpm
