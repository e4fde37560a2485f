#pragma once

#include <string>
#include <vector>

#include "tactile_rom/core/types.hpp"

namespace trom::mpm {

enum class SdfShape { Sphere, Box, MeshGrid };

enum class ContactModel { Sticky, Coulomb };

// Voxelised signed distance field for mesh-derived indenters. Values are
// sampled at node corners and interpolated trilinearly.
struct SdfGrid {
  Vec3i dims{Vec3i::Zero()};
  double dx = 0.0;
  Vec3 origin{Vec3::Zero()};
  std::vector<float> values;

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims.y() + j) * dims.z() + k;
  }
  // Clamped trilinear sample (local frame).
  double sample(const Vec3& p) const;
  // Central-difference gradient (local frame).
  Vec3 gradient(const Vec3& p) const;
};

// Prescribed press: descend along -z at `speed` until `depth` is reached,
// then hold. Pose at t=0 places the lowest indenter point at `start_top`.
struct PressMotion {
  Vec3 start{Vec3::Zero()};  // indenter origin at t=0
  double speed = 1e-3;       // m/s
  double depth = 3e-4;       // m
  double hold = 0.05;        // s

  double travel_time() const { return depth / speed; }
  double total_time() const { return travel_time() + hold; }
};

struct Indenter {
  SdfShape shape = SdfShape::Sphere;
  double radius = 5e-3;                     // sphere
  Vec3 half_extents{5e-3, 5e-3, 2e-3};      // box
  SdfGrid mesh;                             // mesh-derived field
  ContactModel contact = ContactModel::Sticky;
  double friction = 0.0;  // Coulomb coefficient, placeholder default
  PressMotion motion;

  Pose pose_at(double t) const;
  Vec3 velocity_at(double t) const;

  // Signed distance / outward normal in world space for a given pose.
  double sdf(const Vec3& p, const Pose& pose) const;
  Vec3 normal(const Vec3& p, const Pose& pose) const;

  // Distance below the undeformed lowest point, used to place press starts.
  double bottom_offset() const;
};

// Samples an analytic sphere into an SdfGrid (test + example mesh path).
SdfGrid make_sphere_sdf_grid(double radius, double dx, double margin);

}  // namespace trom::mpm
