#include "tactile_rom/mpm/kernel.hpp"

#include <cmath>
#include <string>

#include "tactile_rom/core/error.hpp"

namespace trom::mpm {

KernelWeights bspline_weights(const Vec3& pos, const Grid& grid, long particle) {
  KernelWeights kw;
  const double inv_dx = 1.0 / grid.dx;
  for (int a = 0; a < 3; ++a) {
    double gp = (pos[a] - grid.origin[a]) * inv_dx;
    int base = static_cast<int>(std::floor(gp - 0.5));
    if (base < 0 || base + 2 > grid.dims[a] - 1) {
      throw OutOfDomainError("particle " + std::to_string(particle) +
                             " outside grid interior on axis " + std::to_string(a) +
                             " (grid coordinate " + std::to_string(gp) + ")");
    }
    kw.base[a] = base;
    double fx = gp - base;  // in [0.5, 1.5)
    kw.w[a][0] = 0.5 * (1.5 - fx) * (1.5 - fx);
    kw.w[a][1] = 0.75 - (fx - 1.0) * (fx - 1.0);
    kw.w[a][2] = 0.5 * (fx - 0.5) * (fx - 0.5);
    kw.dw[a][0] = (fx - 1.5) * inv_dx;
    kw.dw[a][1] = (2.0 - 2.0 * fx) * inv_dx;
    kw.dw[a][2] = (fx - 0.5) * inv_dx;
  }
  return kw;
}

}  // namespace trom::mpm
