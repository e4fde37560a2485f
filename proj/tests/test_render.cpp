#include <doctest.h>

#include <cmath>
#include <vector>

#include "tactile_rom/core/error.hpp"
#include "tactile_rom/core/rng.hpp"
#include "tactile_rom/render/depth.hpp"
#include "tactile_rom/render/sensor.hpp"
#include "tactile_rom/render/surface.hpp"

using namespace trom;
using namespace trom::render;

TEST_CASE("refraction identities: normal incidence and matched indices") {
  Vec3 out;
  REQUIRE(refract_direction(Vec3(0, 0, -1), Vec3(0, 0, 1), 1.0 / 1.4, out));
  CHECK((out - Vec3(0, 0, -1)).norm() <= 1e-15);

  // eta = 1 leaves any direction unchanged.
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    Vec3 d(rng.normal(), rng.normal(), -std::abs(rng.normal()) - 0.1);
    d.normalize();
    REQUIRE(refract_direction(d, Vec3(0, 0, 1), 1.0, out));
    CHECK((out - d).norm() < 1e-14);
  }
}

TEST_CASE("refraction obeys Snell's law and preserves the tangent plane") {
  Rng rng(7);
  const double eta = 1.0 / 1.4;
  const Vec3 n0(0, 0, 1);
  for (int t = 0; t < 50; ++t) {
    Vec3 d(rng.normal(), rng.normal(), -std::abs(rng.normal()) - 0.05);
    d.normalize();
    Vec3 out;
    REQUIRE(refract_direction(d, n0, eta, out));
    CHECK(std::abs(out.norm() - 1.0) < 1e-14);

    Vec3 t_in = d - n0 * n0.dot(d);
    Vec3 t_out = out - n0 * n0.dot(out);
    CHECK(t_out.norm() == doctest::Approx(eta * t_in.norm()).epsilon(1e-12));
    if (t_in.norm() > 1e-6)
      CHECK((t_out.normalized() - t_in.normalized()).norm() < 1e-12);
    CHECK(out.z() < 0.0);  // still travelling toward the sensor
  }
}

TEST_CASE("total internal reflection reports false and leaves out untouched") {
  Vec3 out(42.0, 42.0, 42.0);
  // Dense-to-rare with a shallow ray: sin_in = 0.9, eta * sin_in > 1.
  Vec3 d(0.9, 0.0, -std::sqrt(1.0 - 0.81));
  CHECK_FALSE(refract_direction(d, Vec3(0, 0, 1), 1.5, out));
  CHECK(out == Vec3(42.0, 42.0, 42.0));
}

TEST_CASE("apparent depth matches an algebraically rearranged evaluation") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    SensorConfig sensor;
    Vec3 n(rng.normal(), rng.normal(), rng.normal() + 2.0);
    sensor.normal = n.normalized();
    sensor.plane_offset = rng.uniform(-1e-3, 1e-3);

    Vec3 x(rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01), rng.uniform(1e-3, 5e-3));
    Vec3 d(rng.normal(), rng.normal(), -(std::abs(rng.normal()) + 0.5));
    d.normalize();
    double c = sensor.normal.dot(d);
    if (std::abs(c) < 1e-6) continue;

    double D = apparent_depth(x, d, sensor);
    // Same quantity, different association: (z_s + h (c - 1)) / c.
    double h = sensor.normal.dot(x);
    double D2 = (sensor.plane_offset + h * (c - 1.0)) / c;
    CHECK(std::abs(D - D2) <= 1e-15 * std::max(1.0, std::abs(D)));
  }

  SensorConfig sensor;
  CHECK_THROWS_AS(apparent_depth(Vec3(0, 0, 1e-3), Vec3(1, 0, 0), sensor),
                  NumericalError);
}

namespace {

SurfaceSet flat_lattice(int nx, int ny, double spacing, double z, double jitter_px,
                        double pitch, unsigned seed, int skip_i = -1, int skip_j = -1,
                        int skip_extent = 0) {
  Rng rng(seed);
  SurfaceSet s;
  s.spacing = spacing;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      bool skipped = skip_extent > 0 && std::abs(i - skip_i) < skip_extent &&
                     std::abs(j - skip_j) < skip_extent;
      double jx = jitter_px * rng.uniform(-1.0, 1.0) * pitch;
      double jy = jitter_px * rng.uniform(-1.0, 1.0) * pitch;
      if (skipped) continue;  // rng consumed first so layouts stay aligned
      s.indices.push_back(static_cast<int>(s.positions.size()));
      s.positions.emplace_back((10.0 + 4.0 * i) * pitch + jx, (10.0 + 4.0 * j) * pitch + jy,
                               z);
      s.normals.emplace_back(0.0, 0.0, 1.0);
    }
  return s;
}

SensorConfig small_sensor(int w = 96, int h = 96) {
  SensorConfig sensor;
  sensor.width = w;
  sensor.height = h;
  sensor.pitch = 1e-4;
  sensor.origin = Vec3::Zero();
  return sensor;
}

}  // namespace

TEST_CASE("a flat surface renders to a constant depth map") {
  const double z0 = 2e-3;
  SensorConfig sensor = small_sensor();
  SurfaceSet s = flat_lattice(17, 17, 4e-4, z0, 0.15, sensor.pitch, 5);

  DepthMap map = render_depth_map(s, sensor);
  int n_valid = 0;
  double lo = 1e300, hi = -1e300;
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x)
      if (map.is_valid(x, y)) {
        ++n_valid;
        lo = std::min(lo, map.at(x, y));
        hi = std::max(hi, map.at(x, y));
      }
  REQUIRE(n_valid > 1000);
  CHECK(hi - lo < 1e-9);
  // Straight-down rays on a level surface read twice the height.
  CHECK(lo == doctest::Approx(2.0 * z0).epsilon(1e-12));
}

TEST_CASE("renders are equivariant under integer-pixel translations") {
  SensorConfig sensor = small_sensor(128, 128);
  Rng rng(9);
  SurfaceSet s;
  s.spacing = 3e-4;
  for (int i = 0; i < 250; ++i) {
    s.indices.push_back(i);
    s.positions.emplace_back(rng.uniform(25e-4, 75e-4), rng.uniform(25e-4, 75e-4),
                             rng.uniform(1.5e-3, 2.5e-3));
    s.normals.emplace_back(0.0, 0.0, 1.0);
  }

  const int kx = 7, ky = -5;
  SurfaceSet moved = s;
  for (auto& p : moved.positions)
    p += Vec3(kx * sensor.pitch, ky * sensor.pitch, 0.0);

  DepthMap a = render_depth_map(s, sensor);
  DepthMap b = render_depth_map(moved, sensor);

  int both = 0, mismatch = 0;
  double worst = 0.0;
  for (int y = 0; y < a.height; ++y) {
    int ys = y + ky;
    if (ys < 0 || ys >= a.height) continue;
    for (int x = 0; x < a.width; ++x) {
      int xs = x + kx;
      if (xs < 0 || xs >= a.width) continue;
      bool va = a.is_valid(x, y), vb = b.is_valid(xs, ys);
      if (va != vb) ++mismatch;
      if (va && vb) {
        ++both;
        worst = std::max(worst, std::abs(a.at(x, y) - b.at(xs, ys)));
      }
    }
  }
  REQUIRE(both > 500);
  CHECK(worst < 1e-9);
  CHECK(mismatch == 0);
}

TEST_CASE("overlapping splats keep the depth nearest the sensor") {
  SensorConfig sensor = small_sensor();
  SurfaceSet s;
  s.spacing = 2e-4;
  s.indices = {0, 1};
  s.positions = {Vec3(30.3 * sensor.pitch, 40.6 * sensor.pitch, 1.2e-3),
                 Vec3(30.3 * sensor.pitch, 40.6 * sensor.pitch, 2.9e-3)};
  s.normals = {Vec3(0, 0, 1), Vec3(0, 0, 1)};

  DepthMap map = render_depth_map(s, sensor);
  REQUIRE(map.is_valid(30, 40));
  CHECK(map.at(30, 40) == doctest::Approx(2.0 * 1.2e-3).epsilon(1e-12));
}

TEST_CASE("single missing point is median-filled, large holes keep a core") {
  const double z0 = 2e-3;
  SensorConfig sensor = small_sensor();

  // One missing lattice point: the uncovered pixels around ~(42, 42) all have
  // plenty of valid 5x5 neighbours and must be filled with the flat depth.
  SurfaceSet pin = flat_lattice(17, 17, 4e-4, z0, 0.15, sensor.pitch, 5, 8, 8, 1);
  DepthMap filled = render_depth_map(pin, sensor);
  for (int y = 40; y <= 44; ++y)
    for (int x = 40; x <= 44; ++x) {
      REQUIRE(filled.is_valid(x, y));
      CHECK(filled.at(x, y) == doctest::Approx(2.0 * z0).epsilon(1e-12));
    }

  // A 3x3 block of missing points leaves a ~9 px void: the core must stay
  // invalid (fills never cascade from freshly filled pixels).
  SurfaceSet hole = flat_lattice(17, 17, 4e-4, z0, 0.15, sensor.pitch, 5, 8, 8, 2);
  DepthMap gapped = render_depth_map(hole, sensor);
  for (int y = 41; y <= 43; ++y)
    for (int x = 41; x <= 43; ++x) CHECK_FALSE(gapped.is_valid(x, y));
}

TEST_CASE("surfaces entirely outside the image raise a diagnostic error") {
  SensorConfig sensor = small_sensor();
  sensor.origin = Vec3(1.0, 1.0, 0.0);  // a metre away from every point
  SurfaceSet s = flat_lattice(5, 5, 4e-4, 2e-3, 0.0, sensor.pitch, 5);
  CHECK_THROWS_AS(render_depth_map(s, sensor), NumericalError);

  SurfaceSet tir = flat_lattice(5, 5, 4e-4, 2e-3, 0.0, sensor.pitch, 5);
  SensorConfig dense = small_sensor();
  dense.eta = 1.5;  // dense-to-rare
  for (auto& n : tir.normals) n = Vec3(0.95, 0.0, std::sqrt(1.0 - 0.95 * 0.95));
  CHECK_THROWS_AS(render_depth_map(tir, dense), NumericalError);
}

TEST_CASE("surface extraction selects by rest height and fits tilted normals") {
  // Rest: 4 layers; only the top two lie within one spacing of the face.
  std::vector<Vec3> rest;
  std::vector<Vec3> current;
  const double spacing = 1.2e-3;
  const double top_z = 3e-3;
  const Vec3 tilt = Vec3(0.1, -0.05, 1.0).normalized();
  int expected_members = 0;
  for (int layer = 0; layer < 4; ++layer)
    for (int j = 0; j < 8; ++j)
      for (int i = 0; i < 8; ++i) {
        double z = 1e-3 * layer;
        rest.emplace_back(1e-3 * i, 1e-3 * j, z);
        if (std::abs(top_z - z) <= spacing) ++expected_members;
        // Deformed: points moved onto a tilted plane through the origin.
        Vec3 xy(1e-3 * i, 1e-3 * j, 0.0);
        double plane_z = -(tilt.x() * xy.x() + tilt.y() * xy.y()) / tilt.z();
        current.emplace_back(xy.x(), xy.y(), plane_z + 1e-3 * layer * 0.1);
      }

  SurfaceSet s = extract_surface(current, rest, top_z, spacing, Vec3(0, 0, 1));
  CHECK(static_cast<int>(s.indices.size()) == expected_members);
  CHECK(s.spacing == spacing);
  for (std::size_t k = 0; k < s.indices.size(); ++k) {
    CHECK(std::abs(top_z - rest[s.indices[k]].z()) <= spacing);
    CHECK((s.positions[k].array() == current[s.indices[k]].array()).all());
  }

  // Members of one layer are exactly coplanar: fitted normals match the
  // plane normal closely and point along +z.
  int checked = 0;
  for (std::size_t k = 0; k < s.indices.size(); ++k) {
    if (rest[s.indices[k]].z() != 3e-3) continue;
    // Interior points only; rim fits mix the two layers.
    const Vec3& r = rest[s.indices[k]];
    if (r.x() < 2e-3 || r.x() > 5e-3 || r.y() < 2e-3 || r.y() > 5e-3) continue;
    ++checked;
    CHECK(s.normals[k].dot(tilt) > 1.0 - 1e-6);
    CHECK(s.normals[k].z() > 0.0);
  }
  CHECK(checked > 4);

  CHECK_THROWS_AS(extract_surface(current, rest, 20e-3, spacing, Vec3(0, 0, 1)),
                  ConfigError);
  CHECK_THROWS_AS(extract_surface(current, rest, top_z, 0.0, Vec3(0, 0, 1)), ConfigError);
  current.pop_back();
  CHECK_THROWS_AS(extract_surface(current, rest, top_z, spacing, Vec3(0, 0, 1)),
                  ShapeError);
}

TEST_CASE("tiny surfaces fall back to the orientation normal") {
  std::vector<Vec3> rest = {Vec3(0, 0, 3e-3), Vec3(1e-3, 0, 3e-3)};
  std::vector<Vec3> current = {Vec3(0, 0, 2.9e-3), Vec3(1e-3, 0, 2.8e-3)};
  SurfaceSet s = extract_surface(current, rest, 3e-3, 5e-4, Vec3(0, 0, 2));
  REQUIRE(s.indices.size() == 2);
  for (const auto& n : s.normals) CHECK((n - Vec3(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("sensor validation rejects malformed configurations") {
  SensorConfig sensor;
  CHECK_NOTHROW(sensor.validate());
  sensor.normal = Vec3(0, 0, 2);
  CHECK_THROWS_AS(sensor.validate(), ConfigError);
  sensor.normal = Vec3(0, 0, 1);
  sensor.pitch = 0.0;
  CHECK_THROWS_AS(sensor.validate(), ConfigError);
  sensor.pitch = 1e-4;
  sensor.width = 0;
  CHECK_THROWS_AS(sensor.validate(), ConfigError);
  sensor.width = 320;
  sensor.eta = -1.0;
  CHECK_THROWS_AS(sensor.validate(), ConfigError);

  sensor = SensorConfig{};
  Vec3 u, v;
  sensor.basis(u, v);
  CHECK(std::abs(u.norm() - 1.0) < 1e-15);
  CHECK(std::abs(v.norm() - 1.0) < 1e-15);
  CHECK(std::abs(u.dot(sensor.normal)) < 1e-15);
  CHECK(std::abs(v.dot(sensor.normal)) < 1e-15);
  CHECK((u.cross(v) - sensor.normal).norm() < 1e-15);
}
