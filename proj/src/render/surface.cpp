#include "tactile_rom/render/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "tactile_rom/core/error.hpp"

namespace trom::render {

namespace {

// Uniform hash grid over current surface positions for exact kNN queries.
struct HashGrid {
  double cell = 0.0;
  Vec3 lo{Vec3::Zero()};
  int max_ring = 0;
  std::unordered_map<std::int64_t, std::vector<int>> cells;

  static std::int64_t key(int ix, int iy, int iz) {
    return (static_cast<std::int64_t>(ix) << 42) ^ (static_cast<std::int64_t>(iy) << 21) ^
           static_cast<std::int64_t>(iz);
  }

  void build(const std::vector<Vec3>& pts, double cell_size) {
    cell = cell_size;
    Vec3 hi = pts.front();
    lo = pts.front();
    for (const Vec3& p : pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    max_ring = static_cast<int>((hi - lo).maxCoeff() / cell) + 2;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      Vec3 g = (pts[i] - lo) / cell;
      cells[key(static_cast<int>(g.x()), static_cast<int>(g.y()), static_cast<int>(g.z()))]
          .push_back(i);
    }
  }

  // Exact k nearest neighbours of pts[self] (self excluded). Scans cube
  // shells outward; a point in shell m lies at least (m-1)*cell from the
  // query, so the search stops once that bound exceeds the kth distance.
  void knn(const std::vector<Vec3>& pts, int self, int k,
           std::vector<std::pair<double, int>>& out) const {
    out.clear();
    const Vec3 q = pts[self];
    Vec3 g = (q - lo) / cell;
    const int cx = static_cast<int>(g.x());
    const int cy = static_cast<int>(g.y());
    const int cz = static_cast<int>(g.z());
    for (int ring = 0; ring <= max_ring; ++ring) {
      if (out.size() >= static_cast<size_t>(k)) {
        std::partial_sort(out.begin(), out.begin() + k, out.end());
        out.resize(k);
        double bound = (ring - 1) * cell;
        if (bound > 0.0 && bound * bound > out.back().first) return;
      }
      for (int ix = cx - ring; ix <= cx + ring; ++ix)
        for (int iy = cy - ring; iy <= cy + ring; ++iy)
          for (int iz = cz - ring; iz <= cz + ring; ++iz) {
            if (std::max({std::abs(ix - cx), std::abs(iy - cy), std::abs(iz - cz)}) != ring)
              continue;
            auto it = cells.find(key(ix, iy, iz));
            if (it == cells.end()) continue;
            for (int j : it->second) {
              if (j == self) continue;
              out.emplace_back((pts[j] - q).squaredNorm(), j);
            }
          }
    }
    std::sort(out.begin(), out.end());
    if (out.size() > static_cast<size_t>(k)) out.resize(k);
  }
};

}  // namespace

SurfaceSet extract_surface(const std::vector<Vec3>& current, const std::vector<Vec3>& rest,
                           double top_z, double spacing, const Vec3& orient, int k_neighbors) {
  if (current.size() != rest.size()) throw ShapeError("surface: position count mismatch");
  if (!(spacing > 0.0)) throw ConfigError("surface: spacing must be positive");

  SurfaceSet s;
  s.spacing = spacing;
  for (int i = 0; i < static_cast<int>(rest.size()); ++i) {
    if (std::abs(top_z - rest[i].z()) <= spacing) {
      s.indices.push_back(i);
      s.positions.push_back(current[i]);
    }
  }
  if (s.indices.empty())
    throw ConfigError("surface: no particle within one spacing of the top face");

  const int n = static_cast<int>(s.positions.size());
  s.normals.resize(n);
  Vec3 fallback = orient.normalized();
  if (n <= 3) {
    for (Vec3& nv : s.normals) nv = fallback;
    return s;
  }

  HashGrid grid;
  grid.build(s.positions, spacing * 1.5);
  const int k = std::min(k_neighbors, n - 1);

  std::vector<std::pair<double, int>> nbrs;
  for (int i = 0; i < n; ++i) {
    grid.knn(s.positions, i, k, nbrs);
    Vec3 mean = s.positions[i];
    for (auto& [d2, j] : nbrs) mean += s.positions[j];
    mean /= static_cast<double>(nbrs.size() + 1);
    Mat3 cov = Mat3::Zero();
    Vec3 d = s.positions[i] - mean;
    cov += d * d.transpose();
    for (auto& [d2, j] : nbrs) {
      d = s.positions[j] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig;
    eig.computeDirect(cov);
    Vec3 nv = eig.eigenvectors().col(0);
    if (!nv.allFinite() || !(nv.norm() > 0.0)) nv = fallback;
    nv.normalize();
    if (nv.dot(fallback) < 0.0) nv = -nv;
    s.normals[i] = nv;
  }
  return s;
}

}  // namespace trom::render
