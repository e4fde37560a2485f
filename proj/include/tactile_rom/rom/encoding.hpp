#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "tactile_rom/core/error.hpp"
#include "tactile_rom/core/types.hpp"
#include "tactile_rom/io/traj.hpp"

namespace trom::rom {

// Network state vector: per particle, 12 entries in particle order:
// displacement from rest (3) followed by the deformation gradient, row-major
// (9). pack/unpack are plain copies, so they invert each other bitwise.
// Positions are recovered by adding the fixed rest layout back on.
struct StateEncoding {
  static constexpr int kChannels = 12;

  std::vector<Vec3> rest;

  int particle_count() const { return static_cast<int>(rest.size()); }
  int dim() const { return kChannels * particle_count(); }

  VecX pack(const std::vector<Vec3>& disp, const std::vector<Mat3>& F) const {
    const int n = particle_count();
    if (static_cast<int>(disp.size()) != n || static_cast<int>(F.size()) != n)
      throw ShapeError("pack: particle count mismatch");
    VecX q(dim());
    for (int i = 0; i < n; ++i) {
      double* out = q.data() + kChannels * i;
      out[0] = disp[i].x();
      out[1] = disp[i].y();
      out[2] = disp[i].z();
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out[3 + 3 * r + c] = F[i](r, c);
    }
    return q;
  }

  void unpack(const VecX& q, std::vector<Vec3>& disp, std::vector<Mat3>& F) const {
    const int n = particle_count();
    if (q.size() != dim()) throw ShapeError("unpack: state vector has wrong size");
    disp.resize(n);
    F.resize(n);
    for (int i = 0; i < n; ++i) {
      const double* in = q.data() + kChannels * i;
      disp[i] = Vec3(in[0], in[1], in[2]);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) F[i](r, c) = in[3 + 3 * r + c];
    }
  }

  // Widens the stored f32 samples; positions become displacements here.
  VecX pack_frame(const io::TrajFrame& fr) const {
    const int n = particle_count();
    if (static_cast<int>(fr.x.size()) != 3 * n)
      throw ShapeError("pack_frame: frame particle count mismatch");
    VecX q(dim());
    for (int i = 0; i < n; ++i) {
      double* out = q.data() + kChannels * i;
      out[0] = static_cast<double>(fr.x[3 * i + 0]) - rest[i].x();
      out[1] = static_cast<double>(fr.x[3 * i + 1]) - rest[i].y();
      out[2] = static_cast<double>(fr.x[3 * i + 2]) - rest[i].z();
      for (int k = 0; k < 9; ++k) out[3 + k] = static_cast<double>(fr.F[9 * i + k]);
    }
    return q;
  }

  std::vector<Vec3> positions(const VecX& q) const {
    const int n = particle_count();
    if (q.size() != dim()) throw ShapeError("positions: state vector has wrong size");
    std::vector<Vec3> x(n);
    for (int i = 0; i < n; ++i) {
      const double* in = q.data() + kChannels * i;
      x[i] = rest[i] + Vec3(in[0], in[1], in[2]);
    }
    return x;
  }
};

// Per-channel standardization over the 12 repeating channels. Statistics are
// gathered over every particle of every training frame; a floor keeps
// near-constant channels (e.g. off-diagonal F at rest) from exploding.
struct NormStats {
  static constexpr double kStdFloor = 1e-8;

  std::array<double, StateEncoding::kChannels> mean{};
  std::array<double, StateEncoding::kChannels> std{};

  struct Accumulator {
    std::array<double, StateEncoding::kChannels> sum{};
    std::array<double, StateEncoding::kChannels> sum_sq{};
    long long count = 0;  // samples per channel

    void add(const VecX& q) {
      const int k = StateEncoding::kChannels;
      if (q.size() % k != 0) throw ShapeError("norm stats: vector not channel-aligned");
      for (Eigen::Index i = 0; i < q.size(); ++i) {
        const int c = static_cast<int>(i % k);
        sum[c] += q[i];
        sum_sq[c] += q[i] * q[i];
      }
      count += q.size() / k;
    }

    NormStats finalize() const {
      if (count == 0) throw NumericalError("norm stats: no samples");
      NormStats s;
      for (int c = 0; c < StateEncoding::kChannels; ++c) {
        s.mean[c] = sum[c] / static_cast<double>(count);
        double var = sum_sq[c] / static_cast<double>(count) - s.mean[c] * s.mean[c];
        s.std[c] = std::sqrt(std::max(var, 0.0));
        if (s.std[c] < kStdFloor) s.std[c] = kStdFloor;
      }
      return s;
    }
  };

  template <typename Derived>
  void normalize(Eigen::MatrixBase<Derived>& q) const {
    using T = typename Derived::Scalar;
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      const int c = static_cast<int>(r % StateEncoding::kChannels);
      q.row(r) = (q.row(r).array() - static_cast<T>(mean[c])) / static_cast<T>(std[c]);
    }
  }

  template <typename Derived>
  void denormalize(Eigen::MatrixBase<Derived>& q) const {
    using T = typename Derived::Scalar;
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      const int c = static_cast<int>(r % StateEncoding::kChannels);
      q.row(r) = q.row(r).array() * static_cast<T>(std[c]) + static_cast<T>(mean[c]);
    }
  }
};

inline void to_json(nlohmann::json& j, const NormStats& s) {
  j = nlohmann::json{{"mean", s.mean}, {"std", s.std}};
}

inline void from_json(const nlohmann::json& j, NormStats& s) {
  j.at("mean").get_to(s.mean);
  j.at("std").get_to(s.std);
  for (double& v : s.std)
    if (!(v > 0.0)) throw ConfigError("norm stats: std entries must be positive");
}

}  // namespace trom::rom
