#include "tactile_rom/mpm/state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tactile_rom/core/error.hpp"

namespace trom::mpm {

double FullState::total_mass() const {
  double m = 0.0;
  for (const auto& p : particles) m += p.mass;
  return m;
}

Vec3 FullState::total_momentum() const {
  Vec3 mom = Vec3::Zero();
  for (const auto& p : particles) mom += p.mass * p.v;
  return mom;
}

FullState seed_box(const SeedParams& sp, Rng& rng) {
  if (!(sp.extents.minCoeff() > 0.0)) throw ConfigError("seed box extents must be positive");
  double volume = sp.extents.prod();

  int nx, ny, nz;
  if (sp.count > 0) {
    double spacing = std::cbrt(volume / static_cast<double>(sp.count));
    nx = std::max(1, static_cast<int>(std::lround(sp.extents.x() / spacing)));
    ny = std::max(1, static_cast<int>(std::lround(sp.extents.y() / spacing)));
    nz = std::max(1, static_cast<int>(std::lround(sp.extents.z() / spacing)));
    while (static_cast<long>(nx) * ny * nz < sp.count) ++nz;
  } else {
    if (!(sp.dx > 0.0)) throw ConfigError("seeding by particles_per_cell requires dx");
    if (sp.particles_per_cell != 8)
      throw ConfigError("only 8 particles per cell are supported");
    double spacing = 0.5 * sp.dx;
    nx = std::max(1, static_cast<int>(std::lround(sp.extents.x() / spacing)));
    ny = std::max(1, static_cast<int>(std::lround(sp.extents.y() / spacing)));
    nz = std::max(1, static_cast<int>(std::lround(sp.extents.z() / spacing)));
  }

  long lattice_n = static_cast<long>(nx) * ny * nz;
  long target = sp.count > 0 ? sp.count : lattice_n;
  if (target > lattice_n) throw ConfigError("seed target exceeds lattice capacity");

  // Thinning permutation; identity when the lattice already matches.
  std::vector<long> order(lattice_n);
  std::iota(order.begin(), order.end(), 0);
  if (target < lattice_n) rng.shuffle(order);
  std::vector<char> keep(lattice_n, 0);
  for (long i = 0; i < target; ++i) keep[order[i]] = 1;

  Vec3 cell(sp.extents.x() / nx, sp.extents.y() / ny, sp.extents.z() / nz);
  double mass = sp.density * volume / static_cast<double>(target);
  double volume0 = volume / static_cast<double>(target);

  FullState state;
  state.particles.reserve(target);
  long idx = 0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nz; ++k, ++idx) {
        // Jitter is drawn for every lattice site so the layout of kept
        // particles does not depend on the thinning pattern.
        Vec3 off(rng.uniform(-sp.jitter, sp.jitter), rng.uniform(-sp.jitter, sp.jitter),
                 rng.uniform(-sp.jitter, sp.jitter));
        if (!keep[idx]) continue;
        ParticleState p;
        Vec3 frac = Vec3(i + 0.5, j + 0.5, k + 0.5) + off;
        p.x = sp.origin + frac.cwiseProduct(cell);
        p.x0 = p.x;
        p.mass = mass;
        p.volume0 = volume0;
        state.particles.push_back(p);
      }
  return state;
}

}  // namespace trom::mpm
