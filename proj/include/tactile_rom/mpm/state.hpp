#pragma once

#include <cstdint>
#include <vector>

#include "tactile_rom/core/rng.hpp"
#include "tactile_rom/core/types.hpp"

namespace trom::mpm {

struct ParticleState {
  Vec3 x{Vec3::Zero()};   // position
  Vec3 v{Vec3::Zero()};   // velocity
  Mat3 F{Mat3::Identity()};  // deformation gradient
  Mat3 C{Mat3::Zero()};      // affine velocity field (APIC)
  double mass = 0.0;
  double volume0 = 0.0;  // rest volume
  Vec3 x0{Vec3::Zero()};  // rest position
};

struct FullState {
  std::vector<ParticleState> particles;
  double time = 0.0;
  std::int64_t frame_index = 0;

  std::size_t size() const { return particles.size(); }
  double total_mass() const;
  Vec3 total_momentum() const;
};

// Jittered lattice filling the box [origin, origin+extents]. When `count` is
// positive the lattice is sized to approximate it and thinned by a seeded
// random drop to hit it exactly; otherwise `particles_per_cell` (8 by
// default) fixes the lattice at dx/2 spacing. Per-particle mass keeps
// density * box volume exact.
struct SeedParams {
  Vec3 origin{Vec3::Zero()};
  Vec3 extents{Vec3::Zero()};
  long count = 0;
  int particles_per_cell = 8;
  double dx = 0.0;       // required for the ppc mode
  double jitter = 0.2;   // fraction of local spacing
  double density = 1000.0;
};

FullState seed_box(const SeedParams& p, Rng& rng);

}  // namespace trom::mpm
