#pragma once

#include "tactile_rom/core/types.hpp"

namespace trom::mpm {

struct MaterialParams {
  double young_modulus = 1.19e5;  // Pa
  double poisson_ratio = 0.43;
  double density = 1070.0;  // kg/m^3
  // Lame coefficients, derived once so every consumer sees the same values.
  double lame_mu = 0.0;
  double lame_lambda = 0.0;

  static MaterialParams from_young_poisson(double E, double nu, double rho);

  // Speed of the fastest elastic wave; the CFL bound uses this.
  double sound_speed() const;
};

// Rotation factor of F = R S with det(R) = +1.
Mat3 polar_rotation(const Mat3& F);

// First Piola-Kirchhoff stress of the fixed-corotated model.
// Throws InversionError when det(F) <= 0.
Mat3 pk1_stress(const Mat3& F, const MaterialParams& m);

// Strain energy density of the same model; pk1_stress is its F-derivative.
double energy_density(const Mat3& F, const MaterialParams& m);

}  // namespace trom::mpm
