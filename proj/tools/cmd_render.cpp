#include <cstdio>
#include <filesystem>
#include <iostream>
#include <vector>

#include "commands.hpp"
#include "tactile_rom/io/config.hpp"
#include "tactile_rom/io/depth_io.hpp"
#include "tactile_rom/io/traj.hpp"
#include "tactile_rom/render/depth.hpp"
#include "tactile_rom/render/surface.hpp"

namespace trom::cli {

namespace {

std::vector<Vec3> frame_positions(const io::TrajFrame& f) {
  std::vector<Vec3> p(f.x.size() / 3);
  for (size_t i = 0; i < p.size(); ++i)
    p[i] = Vec3(f.x[3 * i], f.x[3 * i + 1], f.x[3 * i + 2]);
  return p;
}

}  // namespace

render::SensorConfig sensor_from_json(const io::Cfg& c, const Vec3& domain_center) {
  c.allow({"normal", "plane_offset", "interface_normal", "eta", "width", "height", "pitch",
           "origin"});
  render::SensorConfig s;
  s.normal = c.vec3("normal", s.normal);
  s.plane_offset = c.num("plane_offset", s.plane_offset);
  s.interface_normal = c.vec3("interface_normal", s.normal);
  s.eta = c.num("eta", s.eta);
  s.width = static_cast<int>(c.integer("width", s.width));
  s.height = static_cast<int>(c.integer("height", s.height));
  s.pitch = c.num("pitch", s.pitch);
  if (c.has("origin")) {
    s.origin = c.vec3("origin");
  } else {
    // Center the image on the grid domain, projected onto the sensor plane.
    Vec3 u, v;
    s.validate();
    s.basis(u, v);
    Vec3 center =
        domain_center - s.normal * (s.normal.dot(domain_center) - s.plane_offset);
    s.origin = center - (0.5 * s.width * s.pitch) * u - (0.5 * s.height * s.pitch) * v;
  }
  s.validate();
  return s;
}

int cmd_render(const Args& a) {
  nlohmann::json j = io::load_json(a.config);
  io::Cfg c(j, a.config);
  c.allow({"trajectory", "surface", "sensor", "frame_stride"});

  const std::string traj_path = c.str("trajectory");
  io::Cfg sc = c.child("surface");
  sc.allow({"top_z", "spacing", "neighbors"});
  const double top_z = sc.num("top_z");
  const double spacing = sc.num("spacing");
  const int neighbors = static_cast<int>(sc.integer("neighbors", 12));
  const long stride = c.integer("frame_stride", 1);
  if (stride < 1) c.fail("frame_stride must be positive");

  io::TrajReader reader(traj_path);
  if (reader.frame_count() == 0) throw IoError(traj_path + ": no frames to render");

  const auto& h = reader.header();
  Vec3 domain_center(h.grid_origin[0] + 0.5 * h.dx * h.grid_dims[0],
                     h.grid_origin[1] + 0.5 * h.dx * h.grid_dims[1],
                     h.grid_origin[2] + 0.5 * h.dx * h.grid_dims[2]);
  nlohmann::json default_sensor = nlohmann::json::object();
  render::SensorConfig sensor =
      c.has("sensor")
          ? sensor_from_json(c.child("sensor"), domain_center)
          : sensor_from_json(io::Cfg(default_sensor, a.config + ":sensor"), domain_center);

  std::filesystem::create_directories(a.out);
  std::vector<Vec3> rest = frame_positions(reader.frame(0));

  long rendered = 0;
  for (std::uint64_t t = 0; t < reader.frame_count(); t += stride) {
    std::vector<Vec3> cur = frame_positions(reader.frame(t));
    render::SurfaceSet surf =
        render::extract_surface(cur, rest, top_z, spacing, sensor.normal, neighbors);
    render::DepthMap map = render::render_depth_map(surf, sensor);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "frame_%06llu", static_cast<unsigned long long>(t));
    io::save_depth_map(a.out + "/" + stem, map, sensor);
    ++rendered;
  }
  std::cout << "render: " << rendered << " depth maps -> " << a.out << "\n";
  return 0;
}

}  // namespace trom::cli
