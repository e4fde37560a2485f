#include "tactile_rom/io/depth_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <vector>

#include <json.hpp>
#include <png.h>

#include "tactile_rom/core/error.hpp"

namespace trom::io {

namespace {

void write_png16(const std::string& path, const render::DepthMap& map, double lo, double hi) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng write failed for " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, map.width, map.height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const double scale = hi > lo ? 65534.0 / (hi - lo) : 0.0;
  std::vector<png_byte> row(static_cast<size_t>(map.width) * 2);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      std::uint16_t v = 0;
      if (map.is_valid(x, y)) {
        double t = 1.0 + (map.at(x, y) - lo) * scale;
        v = static_cast<std::uint16_t>(std::clamp(t, 1.0, 65535.0));
      }
      row[2 * x] = static_cast<png_byte>(v >> 8);
      row[2 * x + 1] = static_cast<png_byte>(v & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace

void save_depth_map(const std::string& stem, const render::DepthMap& map,
                    const render::SensorConfig& sensor) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  size_t n_valid = 0;
  for (size_t i = 0; i < map.depth.size(); ++i) {
    if (!map.valid[i]) continue;
    ++n_valid;
    lo = std::min(lo, map.depth[i]);
    hi = std::max(hi, map.depth[i]);
  }
  if (n_valid == 0) {
    lo = 0.0;
    hi = 0.0;
  }

  {
    std::ofstream f(stem + ".depth.f32", std::ios::binary);
    if (!f) throw IoError("cannot open " + stem + ".depth.f32 for writing");
    std::vector<float> buf(map.depth.size());
    for (size_t i = 0; i < buf.size(); ++i)
      buf[i] = map.valid[i] ? static_cast<float>(map.depth[i])
                            : std::numeric_limits<float>::quiet_NaN();
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!f) throw IoError("short write to " + stem + ".depth.f32");
  }

  nlohmann::json j;
  j["width"] = map.width;
  j["height"] = map.height;
  j["valid_pixels"] = n_valid;
  j["min_depth"] = lo;
  j["max_depth"] = hi;
  j["sensor"] = {{"normal", {sensor.normal.x(), sensor.normal.y(), sensor.normal.z()}},
                 {"plane_offset", sensor.plane_offset},
                 {"interface_normal",
                  {sensor.interface_normal.x(), sensor.interface_normal.y(),
                   sensor.interface_normal.z()}},
                 {"eta", sensor.eta},
                 {"pitch", sensor.pitch},
                 {"origin", {sensor.origin.x(), sensor.origin.y(), sensor.origin.z()}}};
  {
    std::ofstream f(stem + ".json");
    if (!f) throw IoError("cannot open " + stem + ".json for writing");
    f << j.dump(2) << "\n";
  }

  write_png16(stem + ".png", map, lo, hi);
}

render::DepthMap load_depth_map(const std::string& stem) {
  nlohmann::json j;
  {
    std::ifstream f(stem + ".json");
    if (!f) throw IoError("cannot open " + stem + ".json");
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(stem + ".json: " + e.what());
    }
  }
  render::DepthMap map;
  try {
    map.width = j.at("width").get<int>();
    map.height = j.at("height").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(stem + ".json: " + e.what());
  }
  if (map.width < 1 || map.height < 1) throw IoError(stem + ".json: bad resolution");

  const size_t n = static_cast<size_t>(map.width) * map.height;
  std::vector<float> buf(n);
  std::ifstream f(stem + ".depth.f32", std::ios::binary);
  if (!f) throw IoError("cannot open " + stem + ".depth.f32");
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (f.gcount() != static_cast<std::streamsize>(n * sizeof(float)))
    throw IoError(stem + ".depth.f32: truncated");
  f.peek();
  if (!f.eof()) throw IoError(stem + ".depth.f32: trailing bytes");

  map.depth.resize(n);
  map.valid.resize(n);
  for (size_t i = 0; i < n; ++i) {
    map.depth[i] = buf[i];
    map.valid[i] = std::isfinite(static_cast<double>(buf[i])) ? 1 : 0;
  }
  return map;
}

}  // namespace trom::io
