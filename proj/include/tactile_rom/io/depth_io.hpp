#pragma once

#include <string>

#include "tactile_rom/render/depth.hpp"
#include "tactile_rom/render/sensor.hpp"

namespace trom::io {

// Writes `<stem>.depth.f32` (row-major little-endian floats, invalid pixels
// NaN), `<stem>.json` (resolution, sensor parameters, value range) and
// `<stem>.png` (16-bit grayscale, valid range mapped to [1, 65535], invalid
// pixels 0).
void save_depth_map(const std::string& stem, const render::DepthMap& map,
                    const render::SensorConfig& sensor);

// Reads the `<stem>.depth.f32` / `<stem>.json` pair back; NaN marks invalid.
render::DepthMap load_depth_map(const std::string& stem);

}  // namespace trom::io
