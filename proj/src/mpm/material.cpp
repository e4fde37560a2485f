#include "tactile_rom/mpm/material.hpp"

#include <cmath>

#include "tactile_rom/core/error.hpp"

namespace trom::mpm {

MaterialParams MaterialParams::from_young_poisson(double E, double nu, double rho) {
  if (!(E > 0.0)) throw ConfigError("young_modulus must be positive");
  if (!(nu > -1.0 && nu < 0.5)) throw ConfigError("poisson_ratio must lie in (-1, 0.5)");
  if (!(rho > 0.0)) throw ConfigError("density must be positive");
  MaterialParams m;
  m.young_modulus = E;
  m.poisson_ratio = nu;
  m.density = rho;
  m.lame_mu = E / (2.0 * (1.0 + nu));
  m.lame_lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  return m;
}

double MaterialParams::sound_speed() const {
  return std::sqrt((lame_lambda + 2.0 * lame_mu) / density);
}

Mat3 polar_rotation(const Mat3& F) {
  // R = F (F^T F)^-1/2 via the symmetric eigen decomposition; falls back to
  // SVD when F is close to singular.
  Mat3 FtF = F.transpose() * F;
  Eigen::SelfAdjointEigenSolver<Mat3> eig;
  eig.computeDirect(FtF);
  Vec3 ev = eig.eigenvalues();
  if (ev.minCoeff() > 1e-12 * std::max(1.0, ev.maxCoeff())) {
    Vec3 inv_sqrt = ev.cwiseSqrt().cwiseInverse();
    Mat3 S_inv = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
    return F * S_inv;
  }
  Eigen::JacobiSVD<Mat3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 U = svd.matrixU();
  Mat3 V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0.0) U.col(2) *= -1.0;
  return U * V.transpose();
}

Mat3 pk1_stress(const Mat3& F, const MaterialParams& m) {
  double J = F.determinant();
  if (!(J > 0.0)) throw InversionError("deformation gradient inverted (det(F) <= 0)");
  Mat3 R = polar_rotation(F);
  Mat3 F_inv_T = F.inverse().transpose();
  return 2.0 * m.lame_mu * (F - R) + m.lame_lambda * (J - 1.0) * J * F_inv_T;
}

double energy_density(const Mat3& F, const MaterialParams& m) {
  double J = F.determinant();
  if (!(J > 0.0)) throw InversionError("deformation gradient inverted (det(F) <= 0)");
  Mat3 R = polar_rotation(F);
  double dev = (F - R).squaredNorm();
  double vol = J - 1.0;
  return m.lame_mu * dev + 0.5 * m.lame_lambda * vol * vol;
}

}  // namespace trom::mpm
