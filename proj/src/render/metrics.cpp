#include "tactile_rom/render/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include "tactile_rom/core/error.hpp"

namespace trom::render {

namespace {

struct NnGrid {
  double cell = 0.0;
  Vec3 lo{Vec3::Zero()};
  Vec3i hi_cell{Vec3i::Zero()};
  std::unordered_map<std::int64_t, std::vector<int>> cells;
  const std::vector<Vec3>* pts = nullptr;

  static std::int64_t key(int ix, int iy, int iz) {
    return (static_cast<std::int64_t>(ix) << 42) ^ (static_cast<std::int64_t>(iy) << 21) ^
           static_cast<std::int64_t>(iz);
  }

  void build(const std::vector<Vec3>& p) {
    pts = &p;
    Vec3 hi = p.front();
    lo = p.front();
    for (const Vec3& x : p) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    const double extent = std::max((hi - lo).maxCoeff(), 1e-12);
    cell = extent / std::max(1.0, std::cbrt(static_cast<double>(p.size())));
    for (int i = 0; i < static_cast<int>(p.size()); ++i) {
      Vec3 g = (p[i] - lo) / cell;
      Vec3i c(static_cast<int>(g.x()), static_cast<int>(g.y()), static_cast<int>(g.z()));
      hi_cell = hi_cell.cwiseMax(c);
      cells[key(c.x(), c.y(), c.z())].push_back(i);
    }
  }

  // Exact squared distance to the nearest stored point. A point in cube
  // shell m (m >= 1) around the query cell is at least (m-1)*cell away,
  // giving the stopping bound; ring_hi guarantees every occupied cell has
  // been visited even for queries far outside the grid.
  double nearest_sq(const Vec3& q) const {
    Vec3 g = (q - lo) / cell;
    const int cx = static_cast<int>(std::floor(g.x()));
    const int cy = static_cast<int>(std::floor(g.y()));
    const int cz = static_cast<int>(std::floor(g.z()));
    int ring_hi = 0;
    const int cq[3] = {cx, cy, cz};
    for (int a = 0; a < 3; ++a)
      ring_hi = std::max(ring_hi, std::max(std::abs(cq[a]), std::abs(cq[a] - hi_cell[a])));
    ring_hi += 1;
    double best = std::numeric_limits<double>::infinity();
    for (int ring = 0; ring <= ring_hi; ++ring) {
      if (std::isfinite(best)) {
        const double bound = (ring - 1) * cell;
        if (bound > 0.0 && bound * bound > best) return best;
      }
      for (int ix = cx - ring; ix <= cx + ring; ++ix)
        for (int iy = cy - ring; iy <= cy + ring; ++iy)
          for (int iz = cz - ring; iz <= cz + ring; ++iz) {
            if (std::max({std::abs(ix - cx), std::abs(iy - cy), std::abs(iz - cz)}) != ring)
              continue;
            auto it = cells.find(key(ix, iy, iz));
            if (it == cells.end()) continue;
            for (int j : it->second) best = std::min(best, ((*pts)[j] - q).squaredNorm());
          }
    }
    return best;
  }
};

double directional_mean_sq(const std::vector<Vec3>& from, const NnGrid& to, double inv_unit) {
  double acc = 0.0;
  for (const Vec3& q : from) acc += to.nearest_sq(q);
  return acc * inv_unit * inv_unit / static_cast<double>(from.size());
}

constexpr int kWin = 11;

std::vector<double> gaussian_window() {
  std::vector<double> w(kWin * kWin);
  const double sigma = 1.5;
  double sum = 0.0;
  for (int y = 0; y < kWin; ++y)
    for (int x = 0; x < kWin; ++x) {
      const double dx = x - kWin / 2;
      const double dy = y - kWin / 2;
      w[y * kWin + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      sum += w[y * kWin + x];
    }
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

double chamfer_l2(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double unit) {
  if (a.empty() || b.empty()) throw ShapeError("chamfer: empty point set");
  NnGrid ga, gb;
  ga.build(a);
  gb.build(b);
  const double inv_unit = 1.0 / unit;
  return directional_mean_sq(a, gb, inv_unit) + directional_mean_sq(b, ga, inv_unit);
}

double chamfer_l2_brute(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double unit) {
  if (a.empty() || b.empty()) throw ShapeError("chamfer: empty point set");
  const double inv_unit2 = 1.0 / (unit * unit);
  auto dir = [inv_unit2](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double acc = 0.0;
    for (const Vec3& q : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& p : to) best = std::min(best, (p - q).squaredNorm());
      acc += best * inv_unit2;
    }
    return acc / static_cast<double>(from.size());
  };
  return dir(a, b) + dir(b, a);
}

ImageMetrics image_metrics(const DepthMap& a, const DepthMap& b) {
  if (a.width != b.width || a.height != b.height)
    throw ShapeError("image metrics: resolution mismatch");
  const size_t n = a.depth.size();

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  size_t n_pix = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!a.valid[i] || !b.valid[i]) continue;
    ++n_pix;
    lo = std::min({lo, a.depth[i], b.depth[i]});
    hi = std::max({hi, a.depth[i], b.depth[i]});
  }
  if (n_pix == 0) throw NumericalError("image metrics: no jointly valid pixel");

  ImageMetrics m;
  m.n_pixels = n_pix;
  const double range = hi - lo;
  if (!(range > 0.0)) {
    // Identical constant images over the intersection.
    m.ssim = 1.0;
    m.psnr = 99.0;
    m.mae = 0.0;
    m.n_windows = 0;
    return m;
  }
  const double inv_range = 1.0 / range;
  auto norm_a = [&](size_t i) { return (a.depth[i] - lo) * inv_range; };
  auto norm_b = [&](size_t i) { return (b.depth[i] - lo) * inv_range; };

  double abs_acc = 0.0, sq_acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (!a.valid[i] || !b.valid[i]) continue;
    const double d = norm_a(i) - norm_b(i);
    abs_acc += std::abs(d);
    sq_acc += d * d;
  }
  m.mae = abs_acc / static_cast<double>(n_pix);
  const double mse = sq_acc / static_cast<double>(n_pix);
  m.psnr = mse > 0.0 ? std::min(99.0, 10.0 * std::log10(1.0 / mse)) : 99.0;

  static const std::vector<double> win = gaussian_window();
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  double ssim_acc = 0.0;
  size_t n_win = 0;
  for (int y0 = 0; y0 + kWin <= a.height; ++y0)
    for (int x0 = 0; x0 + kWin <= a.width; ++x0) {
      bool ok = true;
      for (int dy = 0; dy < kWin && ok; ++dy) {
        const size_t row = static_cast<size_t>(y0 + dy) * a.width + x0;
        for (int dx = 0; dx < kWin; ++dx)
          if (!a.valid[row + dx] || !b.valid[row + dx]) {
            ok = false;
            break;
          }
      }
      if (!ok) continue;
      double mu_a = 0.0, mu_b = 0.0;
      for (int dy = 0; dy < kWin; ++dy) {
        const size_t row = static_cast<size_t>(y0 + dy) * a.width + x0;
        for (int dx = 0; dx < kWin; ++dx) {
          const double w = win[dy * kWin + dx];
          mu_a += w * norm_a(row + dx);
          mu_b += w * norm_b(row + dx);
        }
      }
      double var_a = 0.0, var_b = 0.0, cov = 0.0;
      for (int dy = 0; dy < kWin; ++dy) {
        const size_t row = static_cast<size_t>(y0 + dy) * a.width + x0;
        for (int dx = 0; dx < kWin; ++dx) {
          const double w = win[dy * kWin + dx];
          const double da = norm_a(row + dx) - mu_a;
          const double db = norm_b(row + dx) - mu_b;
          var_a += w * da * da;
          var_b += w * db * db;
          cov += w * da * db;
        }
      }
      ssim_acc += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                  ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++n_win;
    }
  if (n_win == 0) throw NumericalError("image metrics: no fully valid 11x11 window");
  m.ssim = ssim_acc / static_cast<double>(n_win);
  m.n_windows = n_win;
  return m;
}

}  // namespace trom::render
