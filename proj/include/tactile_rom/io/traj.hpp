#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "tactile_rom/core/types.hpp"
#include "tactile_rom/mpm/state.hpp"

namespace trom::io {

// Binary trajectory container. Little-endian layout:
//   magic "TROM" | version u32 | particle count u64 | frame count u64 |
//   frame dt f64 | dx f64 | grid dims 3*u32 | grid origin 3*f64
// then per frame: x (N*3 f32), v (N*3 f32), F (N*9 f32, row-major per
// particle), indenter pose (7 f32: position xyz, quaternion wxyz).
struct TrajHeader {
  std::uint32_t version = 1;
  std::uint64_t particle_count = 0;
  std::uint64_t frame_count = 0;
  double dt = 0.0;
  double dx = 0.0;
  std::uint32_t grid_dims[3] = {0, 0, 0};
  double grid_origin[3] = {0, 0, 0};
};

struct TrajFrame {
  std::vector<float> x;  // 3N
  std::vector<float> v;  // 3N
  std::vector<float> F;  // 9N
  float pose[7] = {0, 0, 0, 1, 0, 0, 0};

  Pose indenter_pose() const {
    Pose p;
    p.position = Vec3(pose[0], pose[1], pose[2]);
    p.orientation = Quat(pose[3], pose[4], pose[5], pose[6]);
    return p;
  }
};

class TrajWriter {
 public:
  TrajWriter(const std::string& path, std::uint64_t particle_count, double dt, double dx,
             const Vec3i& grid_dims, const Vec3& grid_origin);
  ~TrajWriter();

  void write_frame(const mpm::FullState& state, const Pose& pose);
  void write_frame(const TrajFrame& frame);
  void close();  // patches the frame count; called by the destructor too

 private:
  std::ofstream out_;
  std::string path_;
  TrajHeader header_;
  bool closed_ = false;
};

class TrajReader {
 public:
  explicit TrajReader(const std::string& path);

  const TrajHeader& header() const { return header_; }
  std::uint64_t frame_count() const { return header_.frame_count; }
  TrajFrame frame(std::uint64_t index);

 private:
  std::ifstream in_;
  std::string path_;
  TrajHeader header_;
  std::uint64_t frame_bytes_ = 0;
  std::uint64_t data_start_ = 0;
};

}  // namespace trom::io
