#include "tactile_rom/io/traj.hpp"

#include <cstring>

#include "tactile_rom/core/error.hpp"

namespace trom::io {

namespace {

constexpr char kMagic[4] = {'T', 'R', 'O', 'M'};
constexpr std::uint64_t kFrameCountOffset = 4 + 4 + 8;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

TrajWriter::TrajWriter(const std::string& path, std::uint64_t particle_count, double dt,
                       double dx, const Vec3i& grid_dims, const Vec3& grid_origin)
    : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw IoError("cannot open trajectory for writing: " + path);
  header_.particle_count = particle_count;
  header_.dt = dt;
  header_.dx = dx;
  for (int a = 0; a < 3; ++a) {
    header_.grid_dims[a] = static_cast<std::uint32_t>(grid_dims[a]);
    header_.grid_origin[a] = grid_origin[a];
  }

  out_.write(kMagic, 4);
  write_pod(out_, header_.version);
  write_pod(out_, header_.particle_count);
  write_pod(out_, header_.frame_count);
  write_pod(out_, header_.dt);
  write_pod(out_, header_.dx);
  out_.write(reinterpret_cast<const char*>(header_.grid_dims), sizeof(header_.grid_dims));
  out_.write(reinterpret_cast<const char*>(header_.grid_origin), sizeof(header_.grid_origin));
  if (!out_) throw IoError("failed writing trajectory header: " + path);
}

TrajWriter::~TrajWriter() {
  try {
    close();
  } catch (...) {
    // destructor must not throw; close() explicitly to observe errors
  }
}

void TrajWriter::write_frame(const mpm::FullState& state, const Pose& pose) {
  if (state.size() != header_.particle_count)
    throw ShapeError("frame particle count does not match trajectory header");
  TrajFrame f;
  const std::size_t n = state.size();
  f.x.resize(3 * n);
  f.v.resize(3 * n);
  f.F.resize(9 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = state.particles[i];
    for (int a = 0; a < 3; ++a) {
      f.x[3 * i + a] = static_cast<float>(p.x[a]);
      f.v[3 * i + a] = static_cast<float>(p.v[a]);
    }
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) f.F[9 * i + 3 * r + c] = static_cast<float>(p.F(r, c));
  }
  f.pose[0] = static_cast<float>(pose.position.x());
  f.pose[1] = static_cast<float>(pose.position.y());
  f.pose[2] = static_cast<float>(pose.position.z());
  f.pose[3] = static_cast<float>(pose.orientation.w());
  f.pose[4] = static_cast<float>(pose.orientation.x());
  f.pose[5] = static_cast<float>(pose.orientation.y());
  f.pose[6] = static_cast<float>(pose.orientation.z());
  write_frame(f);
}

void TrajWriter::write_frame(const TrajFrame& frame) {
  if (closed_) throw IoError("trajectory writer already closed: " + path_);
  const std::uint64_t n = header_.particle_count;
  if (frame.x.size() != 3 * n || frame.v.size() != 3 * n || frame.F.size() != 9 * n)
    throw ShapeError("frame arrays do not match trajectory particle count");
  out_.write(reinterpret_cast<const char*>(frame.x.data()), frame.x.size() * sizeof(float));
  out_.write(reinterpret_cast<const char*>(frame.v.data()), frame.v.size() * sizeof(float));
  out_.write(reinterpret_cast<const char*>(frame.F.data()), frame.F.size() * sizeof(float));
  out_.write(reinterpret_cast<const char*>(frame.pose), sizeof(frame.pose));
  if (!out_) throw IoError("failed writing trajectory frame: " + path_);
  ++header_.frame_count;
}

void TrajWriter::close() {
  if (closed_) return;
  out_.seekp(kFrameCountOffset);
  write_pod(out_, header_.frame_count);
  out_.flush();
  if (!out_) throw IoError("failed finalizing trajectory: " + path_);
  out_.close();
  closed_ = true;
}

TrajReader::TrajReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw IoError("cannot open trajectory: " + path);
  char magic[4];
  in_.read(magic, 4);
  if (!in_ || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a trajectory file (bad magic): " + path);
  read_pod(in_, header_.version);
  if (header_.version != 1)
    throw IoError("unsupported trajectory version " + std::to_string(header_.version) +
                  ": " + path);
  read_pod(in_, header_.particle_count);
  read_pod(in_, header_.frame_count);
  read_pod(in_, header_.dt);
  read_pod(in_, header_.dx);
  in_.read(reinterpret_cast<char*>(header_.grid_dims), sizeof(header_.grid_dims));
  in_.read(reinterpret_cast<char*>(header_.grid_origin), sizeof(header_.grid_origin));
  if (!in_) throw IoError("truncated trajectory header: " + path);
  data_start_ = 4 + 4 + 8 + 8 + 8 + 8 + 12 + 24;
  frame_bytes_ = header_.particle_count * 15 * sizeof(float) + 7 * sizeof(float);
}

TrajFrame TrajReader::frame(std::uint64_t index) {
  if (index >= header_.frame_count)
    throw IoError("frame index out of range in " + path_);
  TrajFrame f;
  const std::uint64_t n = header_.particle_count;
  f.x.resize(3 * n);
  f.v.resize(3 * n);
  f.F.resize(9 * n);
  in_.seekg(data_start_ + index * frame_bytes_);
  in_.read(reinterpret_cast<char*>(f.x.data()), f.x.size() * sizeof(float));
  in_.read(reinterpret_cast<char*>(f.v.data()), f.v.size() * sizeof(float));
  in_.read(reinterpret_cast<char*>(f.F.data()), f.F.size() * sizeof(float));
  in_.read(reinterpret_cast<char*>(f.pose), sizeof(f.pose));
  if (!in_) throw IoError("truncated trajectory frame in " + path_);
  return f;
}

}  // namespace trom::io
