#pragma once

#include <vector>

#include "tactile_rom/core/types.hpp"
#include "tactile_rom/render/depth.hpp"

namespace trom::render {

// Symmetric Chamfer distance: mean over a of the squared distance to the
// nearest point in b, plus the same with the roles swapped. Distances are
// expressed in multiples of `unit` (default millimetres), so the result is
// in squared units. Exact nearest neighbours via a uniform grid. Throws
// ShapeError on an empty set.
double chamfer_l2(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double unit = 1e-3);

// O(n^2) reference used to validate the grid-accelerated path.
double chamfer_l2_brute(const std::vector<Vec3>& a, const std::vector<Vec3>& b,
                        double unit = 1e-3);

struct ImageMetrics {
  double ssim = 0.0;
  double psnr = 0.0;
  double mae = 0.0;
  size_t n_pixels = 0;   // valid intersection size
  size_t n_windows = 0;  // fully valid 11x11 SSIM windows
};

// Compares two depth maps over the intersection of their validity masks
// after jointly normalising to [0, 1] by the shared min/max. SSIM uses
// 11x11 Gaussian windows (sigma 1.5, k1 0.01, k2 0.03) that are fully valid
// in both maps; PSNR uses peak 1.0 and is capped at 99 dB. Throws
// NumericalError when the intersection is empty or no SSIM window fits.
ImageMetrics image_metrics(const DepthMap& a, const DepthMap& b);

}  // namespace trom::render
