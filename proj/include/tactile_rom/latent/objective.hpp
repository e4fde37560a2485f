#pragma once

#include <limits>

#include "tactile_rom/mpm/indenter.hpp"
#include "tactile_rom/mpm/material.hpp"
#include "tactile_rom/rom/autoencoder.hpp"
#include "tactile_rom/rom/encoding.hpp"

namespace trom::latent {

// Everything a per-frame latent solve needs. The decoded state is anchored to
// `q_inertial` through a mass-weighted positional norm and pays the potential
// energy (elastic from its F block, contact against the indenter, gravity) of
// its decoded configuration. Particle mass/volume are uniform by seeding.
struct LatentObjectiveContext {
  const rom::Autoencoder<double>* net = nullptr;
  const rom::NormStats* norm = nullptr;
  const rom::StateEncoding* enc = nullptr;

  double particle_mass = 0.0;
  double particle_volume = 0.0;
  mpm::MaterialParams material;
  const mpm::Indenter* indenter = nullptr;  // optional
  Pose indenter_pose;
  double contact_stiffness = 0.0;
  Vec3 gravity{Vec3::Zero()};

  VecX q_inertial;   // packed (disp, F); only the positional block is anchored
  double dt = 0.0;   // frame stride
};

// Propagates the anchor state: positions advance by dt*v (+ dt^2*g), the F
// block is carried unchanged.
inline VecX inertial_target(const VecX& q_hat, const VecX& v_hat, double dt,
                            const Vec3& gravity) {
  constexpr int kC = rom::StateEncoding::kChannels;
  if (q_hat.size() % kC != 0) throw ShapeError("inertial_target: bad state length");
  const Eigen::Index n = q_hat.size() / kC;
  if (v_hat.size() != 3 * n) throw ShapeError("inertial_target: velocity length mismatch");
  VecX q = q_hat;
  for (Eigen::Index i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a)
      q[kC * i + a] += dt * v_hat[3 * i + a] + dt * dt * gravity[a];
  return q;
}

// J(z) and dJ/dz. Decoded states with det(F) <= 0 report +inf and leave the
// gradient untouched, so the line search backs off instead of aborting.
inline double latent_objective(const VecX& z, const LatentObjectiveContext& ctx,
                               VecX& grad) {
  constexpr int kC = rom::StateEncoding::kChannels;
  using Mlp64 = rom::Mlp<double>;

  const rom::StateEncoding& enc = *ctx.enc;
  const Eigen::Index n = enc.particle_count();
  if (ctx.q_inertial.size() != kC * n)
    throw ShapeError("latent objective: inertial target has wrong length");
  if (!(ctx.dt > 0.0)) throw ShapeError("latent objective: dt must be positive");

  typename Mlp64::Cache cache;
  typename Mlp64::Mat x_n = ctx.net->decoder.forward(z, &cache);
  if (!x_n.allFinite())
    throw NumericalError("decoder produced non-finite output; parameters are corrupt");
  VecX q = x_n.col(0);
  ctx.norm->denormalize(q);

  // dJ/dq in physical units, then chained through the channel scaling and
  // the decoder.
  VecX dq = VecX::Zero(kC * n);
  double J = 0.0;
  const double inv_dt2 = 1.0 / (ctx.dt * ctx.dt);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double* qi = q.data() + kC * i;
    Mat3 F;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) F(r, c) = qi[3 + 3 * r + c];
    if (!(F.determinant() > 0.0)) return std::numeric_limits<double>::infinity();

    Vec3 x = enc.rest[i] + Vec3(qi[0], qi[1], qi[2]);
    Vec3 dx_in(qi[0] - ctx.q_inertial[kC * i + 0], qi[1] - ctx.q_inertial[kC * i + 1],
               qi[2] - ctx.q_inertial[kC * i + 2]);

    J += 0.5 * inv_dt2 * ctx.particle_mass * dx_in.squaredNorm();
    Vec3 gpos = inv_dt2 * ctx.particle_mass * dx_in;

    J += ctx.particle_volume * mpm::energy_density(F, ctx.material);
    Mat3 gF = ctx.particle_volume * mpm::pk1_stress(F, ctx.material);

    if (ctx.indenter && ctx.contact_stiffness > 0.0) {
      double phi = ctx.indenter->sdf(x, ctx.indenter_pose);
      if (phi < 0.0) {
        J += 0.5 * ctx.contact_stiffness * phi * phi * ctx.particle_volume;
        gpos += ctx.contact_stiffness * phi * ctx.particle_volume *
                ctx.indenter->normal(x, ctx.indenter_pose);
      }
    }
    J -= ctx.particle_mass * ctx.gravity.dot(x);
    gpos -= ctx.particle_mass * ctx.gravity;

    double* di = dq.data() + kC * i;
    di[0] = gpos.x();
    di[1] = gpos.y();
    di[2] = gpos.z();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) di[3 + 3 * r + c] = gF(r, c);
  }

  // d(physical)/d(normalized) is the per-channel std.
  for (Eigen::Index r = 0; r < dq.size(); ++r) dq[r] *= ctx.norm->std[r % kC];
  typename Mlp64::Mat dz = ctx.net->decoder.backward(dq, cache, nullptr);
  grad = dz.col(0);
  return J;
}

}  // namespace trom::latent
