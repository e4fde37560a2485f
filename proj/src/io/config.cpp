#include "tactile_rom/io/config.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "tactile_rom/core/error.hpp"

namespace trom::io {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line:column for a readable message
    std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": " + e.what());
  }
}

Cfg::Cfg(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
  if (!j_->is_object()) throw ConfigError(path_ + ": expected a JSON object");
}

void Cfg::fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }

bool Cfg::has(const std::string& key) const { return j_->contains(key); }

Cfg Cfg::child(const std::string& key) const {
  if (!j_->contains(key)) fail("missing required object '" + key + "'");
  return Cfg((*j_)[key], path_ + "." + key);
}

void Cfg::allow(std::initializer_list<const char*> allowed) const {
  for (auto it = j_->begin(); it != j_->end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok) fail("unknown key '" + it.key() + "'");
  }
}

namespace {

const json& fetch(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key))
    throw ConfigError(path + ": missing required key '" + key + "'");
  return j[key];
}

double as_num(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

}  // namespace

double Cfg::num(const std::string& key) const {
  return as_num(fetch(*j_, path_, key), path_ + "." + key);
}

double Cfg::num(const std::string& key, double fallback) const {
  if (!j_->contains(key)) return fallback;
  return as_num((*j_)[key], path_ + "." + key);
}

long Cfg::integer(const std::string& key) const {
  const json& v = fetch(*j_, path_, key);
  if (!v.is_number_integer()) fail("key '" + key + "' must be an integer");
  return v.get<long>();
}

long Cfg::integer(const std::string& key, long fallback) const {
  if (!j_->contains(key)) return fallback;
  const json& v = (*j_)[key];
  if (!v.is_number_integer()) fail("key '" + key + "' must be an integer");
  return v.get<long>();
}

bool Cfg::boolean(const std::string& key, bool fallback) const {
  if (!j_->contains(key)) return fallback;
  const json& v = (*j_)[key];
  if (!v.is_boolean()) fail("key '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::string Cfg::str(const std::string& key) const {
  const json& v = fetch(*j_, path_, key);
  if (!v.is_string()) fail("key '" + key + "' must be a string");
  return v.get<std::string>();
}

std::string Cfg::str(const std::string& key, const std::string& fallback) const {
  if (!j_->contains(key)) return fallback;
  const json& v = (*j_)[key];
  if (!v.is_string()) fail("key '" + key + "' must be a string");
  return v.get<std::string>();
}

Vec3 Cfg::vec3(const std::string& key) const {
  const json& v = fetch(*j_, path_, key);
  if (!v.is_array() || v.size() != 3) fail("key '" + key + "' must be an array of 3 numbers");
  return Vec3(as_num(v[0], path_), as_num(v[1], path_), as_num(v[2], path_));
}

Vec3 Cfg::vec3(const std::string& key, const Vec3& fallback) const {
  if (!j_->contains(key)) return fallback;
  return vec3(key);
}

Vec3i Cfg::vec3i(const std::string& key) const {
  const json& v = fetch(*j_, path_, key);
  if (!v.is_array() || v.size() != 3) fail("key '" + key + "' must be an array of 3 integers");
  for (int a = 0; a < 3; ++a)
    if (!v[a].is_number_integer())
      fail("key '" + key + "' must hold integers");
  return Vec3i(v[0].get<int>(), v[1].get<int>(), v[2].get<int>());
}

namespace {

mpm::WallType wall_from_string(const std::string& s, const Cfg& c, const std::string& key) {
  if (s == "sticky") return mpm::WallType::Sticky;
  if (s == "separate") return mpm::WallType::Separate;
  if (s == "open") return mpm::WallType::Open;
  c.fail("wall '" + key + "' must be one of sticky/separate/open");
}

}  // namespace

mpm::SimConfig sim_config_from_json(const Cfg& c) {
  c.allow({"grid_dims", "dx", "dt", "cfl_factor", "n_coarse", "n_fine", "material",
           "indenter", "elastomer_origin", "elastomer_extents", "gravity", "boundary",
           "contact_stiffness", "seed_jitter"});
  mpm::SimConfig cfg;
  cfg.grid_dims = c.vec3i("grid_dims");
  cfg.dx = c.num("dx");
  cfg.dt = c.num("dt", 0.0);
  cfg.cfl_factor = c.num("cfl_factor", 0.5);
  cfg.n_coarse = c.integer("n_coarse", 10000);
  cfg.n_fine = c.integer("n_fine", 100000);

  Cfg m = c.child("material");
  m.allow({"young_modulus", "poisson_ratio", "density"});
  cfg.material = mpm::MaterialParams::from_young_poisson(
      m.num("young_modulus"), m.num("poisson_ratio"), m.num("density"));

  cfg.elastomer_origin = c.vec3("elastomer_origin", Vec3::Zero());
  cfg.elastomer_extents = c.vec3("elastomer_extents");
  cfg.gravity = c.vec3("gravity", Vec3::Zero());
  cfg.contact_stiffness = c.num("contact_stiffness", 1e6);
  cfg.seed_jitter = c.num("seed_jitter", 0.2);

  if (c.has("boundary")) {
    Cfg b = c.child("boundary");
    b.allow({"x_min", "x_max", "y_min", "y_max", "z_min", "z_max"});
    auto wall = [&](const char* key, mpm::WallType dflt) {
      if (!b.has(key)) return dflt;
      return wall_from_string(b.str(key), b, key);
    };
    cfg.boundary.x_min = wall("x_min", mpm::WallType::Separate);
    cfg.boundary.x_max = wall("x_max", mpm::WallType::Separate);
    cfg.boundary.y_min = wall("y_min", mpm::WallType::Separate);
    cfg.boundary.y_max = wall("y_max", mpm::WallType::Separate);
    cfg.boundary.z_min = wall("z_min", mpm::WallType::Sticky);
    cfg.boundary.z_max = wall("z_max", mpm::WallType::Open);
  }

  Cfg ind = c.child("indenter");
  ind.allow({"shape", "radius", "half_extents", "sdf_path", "contact", "friction",
             "motion"});
  std::string shape = ind.str("shape", "sphere");
  if (shape == "sphere") {
    cfg.indenter.shape = mpm::SdfShape::Sphere;
    cfg.indenter.radius = ind.num("radius", 5e-3);
  } else if (shape == "box") {
    cfg.indenter.shape = mpm::SdfShape::Box;
    cfg.indenter.half_extents = ind.vec3("half_extents");
  } else if (shape == "mesh") {
    cfg.indenter.shape = mpm::SdfShape::MeshGrid;
    cfg.indenter.mesh = load_sdf_grid(ind.str("sdf_path"));
  } else {
    ind.fail("shape must be one of sphere/box/mesh");
  }
  std::string contact = ind.str("contact", "sticky");
  if (contact == "sticky")
    cfg.indenter.contact = mpm::ContactModel::Sticky;
  else if (contact == "coulomb")
    cfg.indenter.contact = mpm::ContactModel::Coulomb;
  else
    ind.fail("contact must be sticky or coulomb");
  cfg.indenter.friction = ind.num("friction", 0.0);

  Cfg mo = ind.child("motion");
  mo.allow({"start", "offset", "clearance", "speed", "depth", "hold"});
  cfg.indenter.motion.speed = mo.num("speed", 1e-3);
  cfg.indenter.motion.depth = mo.num("depth", 3e-4);
  cfg.indenter.motion.hold = mo.num("hold", 0.05);
  if (mo.has("start")) {
    cfg.indenter.motion.start = mo.vec3("start");
  } else {
    // Start pose derived from the press parameters: the lowest indenter point
    // touches the elastomer top face at the given xy offset plus clearance.
    Vec3 offset = Vec3::Zero();
    if (mo.has("offset")) {
      const json& v = mo.raw()["offset"];
      if (!v.is_array() || v.size() != 2)
        mo.fail("offset must be an array [x, y]");
      offset.x() = v[0].get<double>();
      offset.y() = v[1].get<double>();
    }
    double clearance = mo.num("clearance", 0.0);
    mpm::set_press_start(cfg, offset.x(), offset.y(), clearance);
  }

  cfg.validate();
  return cfg;
}

mpm::SdfGrid load_sdf_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open SDF grid: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SDFG", 4) != 0)
    throw IoError("not an SDF grid file (bad magic): " + path);
  std::uint32_t dims[3];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  mpm::SdfGrid g;
  g.dims = Vec3i(dims[0], dims[1], dims[2]);
  double origin[3];
  in.read(reinterpret_cast<char*>(&g.dx), sizeof(double));
  in.read(reinterpret_cast<char*>(origin), sizeof(origin));
  g.origin = Vec3(origin[0], origin[1], origin[2]);
  std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  g.values.resize(n);
  in.read(reinterpret_cast<char*>(g.values.data()), n * sizeof(float));
  if (!in) throw IoError("truncated SDF grid: " + path);
  return g;
}

void save_sdf_grid(const mpm::SdfGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open SDF grid for writing: " + path);
  out.write("SDFG", 4);
  std::uint32_t dims[3] = {static_cast<std::uint32_t>(grid.dims.x()),
                           static_cast<std::uint32_t>(grid.dims.y()),
                           static_cast<std::uint32_t>(grid.dims.z())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(&grid.dx), sizeof(double));
  double origin[3] = {grid.origin.x(), grid.origin.y(), grid.origin.z()};
  out.write(reinterpret_cast<const char*>(origin), sizeof(origin));
  out.write(reinterpret_cast<const char*>(grid.values.data()),
            grid.values.size() * sizeof(float));
  if (!out) throw IoError("failed writing SDF grid: " + path);
}

}  // namespace trom::io
