#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "tactile_rom/mpm/sim.hpp"

namespace trom::io {

// Reads and parses a JSON file; parse errors carry line:column positions.
nlohmann::json load_json(const std::string& path);

// Strict accessor over a JSON object. Unknown keys are rejected, missing
// required keys and type mismatches name the full key path.
class Cfg {
 public:
  Cfg(const nlohmann::json& j, std::string path);

  bool has(const std::string& key) const;
  Cfg child(const std::string& key) const;

  // Every key of this object must appear in `allowed`.
  void allow(std::initializer_list<const char*> allowed) const;

  double num(const std::string& key) const;
  double num(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  Vec3 vec3(const std::string& key) const;
  Vec3 vec3(const std::string& key, const Vec3& fallback) const;
  Vec3i vec3i(const std::string& key) const;

  const nlohmann::json& raw() const { return *j_; }
  const std::string& path() const { return path_; }
  [[noreturn]] void fail(const std::string& msg) const;

 private:
  const nlohmann::json* j_;
  std::string path_;
};

mpm::SimConfig sim_config_from_json(const Cfg& c);

// Binary SDF voxel grid: magic "SDFG" | dims 3*u32 | dx f64 | origin 3*f64 |
// values f32 (x-major, same index order as SdfGrid).
mpm::SdfGrid load_sdf_grid(const std::string& path);
void save_sdf_grid(const mpm::SdfGrid& grid, const std::string& path);

}  // namespace trom::io
