#include "tactile_rom/latent/rollout.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

#include "tactile_rom/core/error.hpp"
#include "tactile_rom/io/traj.hpp"
#include "tactile_rom/latent/objective.hpp"
#include "tactile_rom/mpm/transfer.hpp"

namespace trom::latent {

using nlohmann::json;

RolloutConfig rollout_config_from_json(const io::Cfg& c) {
  c.allow({"checkpoint", "fine", "coarse", "scenario", "frame_dt", "frames", "lbfgs",
           "warm_start"});
  RolloutConfig r;
  r.checkpoint = c.str("checkpoint", "");  // ablation runs inject per-variant paths
  r.fine = io::sim_config_from_json(c.child("fine"));
  r.coarse = io::sim_config_from_json(c.child("coarse"));
  r.frame_dt = c.num("frame_dt");
  r.frames = static_cast<int>(c.integer("frames"));
  if (!(r.frame_dt > 0.0)) c.fail("frame_dt must be positive");
  if (r.frames < 1) c.fail("frames must be >= 1");

  if (c.has("scenario")) {
    io::Cfg sc = c.child("scenario");
    sc.allow({"id", "offset", "depth", "speed", "hold", "clearance"});
    r.scenario.id = sc.str("id", "rollout");
    if (sc.has("offset")) {
      const json& v = sc.raw().at("offset");
      if (!v.is_array() || v.size() != 2) sc.fail("offset must be an array [x, y]");
      r.scenario.offset_x = v[0].get<double>();
      r.scenario.offset_y = v[1].get<double>();
    }
    r.scenario.depth = sc.num("depth", r.scenario.depth);
    r.scenario.speed = sc.num("speed", r.scenario.speed);
    r.scenario.hold = sc.num("hold", r.scenario.hold);
    r.scenario.clearance = sc.num("clearance", r.scenario.clearance);
  }
  if (c.has("lbfgs")) {
    io::Cfg lb = c.child("lbfgs");
    lb.allow({"max_iters", "grad_tolerance", "history", "armijo_c1", "backtrack",
              "max_backtracks"});
    r.lbfgs.max_iters = static_cast<int>(lb.integer("max_iters", r.lbfgs.max_iters));
    r.lbfgs.grad_tolerance = lb.num("grad_tolerance", r.lbfgs.grad_tolerance);
    r.lbfgs.history = static_cast<int>(lb.integer("history", r.lbfgs.history));
    r.lbfgs.armijo_c1 = lb.num("armijo_c1", r.lbfgs.armijo_c1);
    r.lbfgs.backtrack = lb.num("backtrack", r.lbfgs.backtrack);
    r.lbfgs.max_backtracks =
        static_cast<int>(lb.integer("max_backtracks", r.lbfgs.max_backtracks));
    r.lbfgs.validate();
  }
  std::string ws = c.str("warm_start", "previous");
  if (ws == "previous")
    r.warm_start = WarmStart::Previous;
  else if (ws == "encode_coarse")
    r.warm_start = WarmStart::EncodeCoarse;
  else
    c.fail("warm_start must be previous or encode_coarse");
  return r;
}

namespace {

// The training-side encoding is defined over f32-stored rest positions, so
// the rollout snaps its re-seeded layout through f32 too.
std::vector<Vec3> snap_f32(const std::vector<mpm::ParticleState>& ps) {
  std::vector<Vec3> rest(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (int a = 0; a < 3; ++a) rest[i][a] = static_cast<double>(static_cast<float>(ps[i].x[a]));
  return rest;
}

VecX encode_normalized(const rom::Autoencoder<double>& net, const rom::NormStats& norm,
                       VecX q_phys) {
  norm.normalize(q_phys);
  return net.encode(q_phys).col(0);
}

}  // namespace

RolloutResult run_rollout(const RolloutConfig& cfg, const rom::Checkpoint& ck,
                          std::uint64_t seed, bool deterministic,
                          const std::string& out_traj, const std::string& out_sidecar) {
  mpm::SimConfig fine_cfg = cfg.fine;
  mpm::SimConfig coarse_cfg = cfg.coarse;
  fine_cfg.indenter.motion.depth = cfg.scenario.depth;
  fine_cfg.indenter.motion.speed = cfg.scenario.speed;
  fine_cfg.indenter.motion.hold = cfg.scenario.hold;
  mpm::set_press_start(fine_cfg, cfg.scenario.offset_x, cfg.scenario.offset_y,
                       cfg.scenario.clearance);
  fine_cfg.validate();
  coarse_cfg.indenter.motion = fine_cfg.indenter.motion;
  coarse_cfg.indenter.motion.start = fine_cfg.indenter.motion.start;
  coarse_cfg.validate();

  // The fine solver is never stepped; it only reproduces the training rest
  // layout and the per-particle mass/volume.
  mpm::Simulation fine(fine_cfg, mpm::Resolution::Fine, seed);
  mpm::Simulation coarse(coarse_cfg, mpm::Resolution::Coarse, seed);

  rom::Autoencoder<double> net = ck.net.cast<double>();
  rom::StateEncoding enc;
  enc.rest = snap_f32(fine.state.particles);
  const Eigen::Index n = enc.particle_count();
  if (net.arch.input_dim != enc.dim())
    throw ConfigError("checkpoint was trained for " +
                      std::to_string(net.arch.input_dim / 12) +
                      " particles, config seeds " + std::to_string(n));

  LatentObjectiveContext ctx;
  ctx.net = &net;
  ctx.norm = &ck.norm;
  ctx.enc = &enc;
  ctx.particle_mass = fine.state.particles[0].mass;
  ctx.particle_volume = fine.state.particles[0].volume0;
  ctx.material = fine_cfg.material;
  ctx.indenter = &fine_cfg.indenter;
  ctx.contact_stiffness = fine_cfg.contact_stiffness;
  ctx.gravity = fine_cfg.gravity;
  ctx.dt = cfg.frame_dt;

  // Rest state: zero displacement, identity F.
  VecX q_rest = VecX::Zero(enc.dim());
  for (Eigen::Index i = 0; i < n; ++i)
    for (int d = 0; d < 3; ++d) q_rest[12 * i + 3 + 4 * d] = 1.0;

  io::TrajWriter writer(out_traj, static_cast<std::uint64_t>(n), cfg.frame_dt, fine_cfg.dx,
                        fine_cfg.grid_dims, fine_cfg.grid_origin());

  RolloutResult result;
  VecX z = encode_normalized(net, ck.norm, q_rest);
  VecX q_prev = q_rest;       // previous decoded physical state
  VecX v_prev = VecX::Zero(3 * n);

  std::vector<Vec3> coarse_rest;
  if (cfg.warm_start == WarmStart::EncodeCoarse) coarse_rest = snap_f32(coarse.state.particles);

  for (int t = 0; t < cfg.frames; ++t) {
    auto t0 = std::chrono::steady_clock::now();
    const double time = t * cfg.frame_dt;
    if (t > 0) coarse.advance_to(time);
    ctx.indenter_pose = fine_cfg.indenter.pose_at(time);
    ctx.q_inertial = inertial_target(q_prev, v_prev, cfg.frame_dt, ctx.gravity);

    VecX z0 = z;
    if (cfg.warm_start == WarmStart::EncodeCoarse) {
      // Move the coarse state onto the fine layout and encode it.
      const auto& cp = coarse.state.particles;
      MatX src(12, static_cast<Eigen::Index>(cp.size()));
      for (std::size_t i = 0; i < cp.size(); ++i) {
        for (int a = 0; a < 3; ++a) src(a, i) = cp[i].x[a] - coarse_rest[i][a];
        for (int r = 0; r < 3; ++r)
          for (int cc = 0; cc < 3; ++cc) src(3 + 3 * r + cc, i) = cp[i].F(r, cc);
      }
      MatX up = mpm::field_transfer(coarse.grid, coarse_rest, src, enc.rest);
      VecX q_up(enc.dim());
      for (Eigen::Index i = 0; i < n; ++i) q_up.segment(12 * i, 12) = up.col(i);
      z0 = encode_normalized(net, ck.norm, q_up);
    }

    LbfgsResult lr = lbfgs_minimize(
        z0, [&](const VecX& zz, VecX& gg) { return latent_objective(zz, ctx, gg); },
        cfg.lbfgs);
    z = lr.z;

    typename rom::Mlp<double>::Mat x_n = net.decode(z);
    VecX q_hat = x_n.col(0);
    ck.norm.denormalize(q_hat);

    VecX v_hat = VecX::Zero(3 * n);
    if (t > 0)
      for (Eigen::Index i = 0; i < n; ++i)
        for (int a = 0; a < 3; ++a)
          v_hat[3 * i + a] = (q_hat[12 * i + a] - q_prev[12 * i + a]) / cfg.frame_dt;

    io::TrajFrame frame;
    frame.x.resize(3 * n);
    frame.v.resize(3 * n);
    frame.F.resize(9 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int a = 0; a < 3; ++a) {
        frame.x[3 * i + a] = static_cast<float>(enc.rest[i][a] + q_hat[12 * i + a]);
        frame.v[3 * i + a] = static_cast<float>(v_hat[3 * i + a]);
      }
      for (int k = 0; k < 9; ++k)
        frame.F[9 * i + k] = static_cast<float>(q_hat[12 * i + 3 + k]);
    }
    const Pose pose = ctx.indenter_pose;
    frame.pose[0] = static_cast<float>(pose.position.x());
    frame.pose[1] = static_cast<float>(pose.position.y());
    frame.pose[2] = static_cast<float>(pose.position.z());
    frame.pose[3] = static_cast<float>(pose.orientation.w());
    frame.pose[4] = static_cast<float>(pose.orientation.x());
    frame.pose[5] = static_cast<float>(pose.orientation.y());
    frame.pose[6] = static_cast<float>(pose.orientation.z());
    writer.write_frame(frame);

    FrameStats fs;
    fs.frame = t;
    fs.objective = lr.objective;
    fs.warm_objective = lr.initial_objective;
    fs.grad_norm = lr.grad_norm;
    fs.iterations = lr.iterations;
    fs.stalled = lr.stalled;
    fs.wall_ms =
        deterministic
            ? 0.0
            : 1e3 * std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                        .count();
    if (fs.stalled)
      std::cerr << "frame " << t << ": line search stalled (objective " << fs.objective
                << ")\n";
    result.stats.push_back(fs);

    q_prev = q_hat;
    v_prev = v_hat;
  }
  writer.close();

  if (!out_sidecar.empty()) {
    json frames = json::array();
    for (const FrameStats& fs : result.stats)
      frames.push_back({{"frame", fs.frame},
                        {"objective", fs.objective},
                        {"warm_objective", fs.warm_objective},
                        {"grad_norm", fs.grad_norm},
                        {"iterations", fs.iterations},
                        {"stalled", fs.stalled},
                        {"wall_ms", fs.wall_ms}});
    std::ofstream out(out_sidecar, std::ios::trunc);
    if (!out) throw IoError("cannot write rollout sidecar: " + out_sidecar);
    out << json{{"frames", frames}}.dump(2) << "\n";
  }
  return result;
}

}  // namespace trom::latent
