#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "commands.hpp"
#include "tactile_rom/core/error.hpp"
#include "tactile_rom/io/config.hpp"
#include "tactile_rom/io/traj.hpp"
#include "tactile_rom/mpm/sim.hpp"

namespace trom::cli {

int cmd_simulate(const Args& a) {
  nlohmann::json j = io::load_json(a.config);
  io::Cfg c(j, a.config);
  c.allow({"sim", "resolution", "frame_dt", "frames"});

  mpm::SimConfig cfg = io::sim_config_from_json(c.child("sim"));
  const std::string res_name = c.str("resolution", "coarse");
  mpm::Resolution res;
  if (res_name == "coarse")
    res = mpm::Resolution::Coarse;
  else if (res_name == "fine")
    res = mpm::Resolution::Fine;
  else
    c.fail("resolution must be \"coarse\" or \"fine\"");
  const double frame_dt = c.num("frame_dt", 4e-3);
  long frames = c.integer("frames", 60);
  if (a.frames >= 0) frames = a.frames;
  if (frame_dt <= 0.0) c.fail("frame_dt must be positive");
  if (frames < 0) c.fail("frames must be non-negative");

  std::filesystem::create_directories(a.out);
  const std::string traj_path = a.out + "/sim.traj";

  const auto t0 = std::chrono::steady_clock::now();
  mpm::Simulation sim(cfg, res, a.seed);

    double max_disp = 0.0;
  {
    io::TrajWriter writer(traj_path, sim.state.size(), frame_dt, cfg.dx, cfg.grid_dims,
                          cfg.grid_origin());
    if (frames > 0) {
      mpm::run_press_scenario(sim, frame_dt, static_cast<int>(frames),
                              [&](const mpm::FullState& s, const Pose& pose) {
                                writer.write_frame(s, pose);
                                for (const auto& part : s.particles)
                                  max_disp = std::max(max_disp, (part.x - part.x0).norm());
                              });
    }
    writer.close();
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::json summary;
  summary["steps"] = sim.step_count;
  summary["frames"] = frames;
  summary["wall_seconds"] = a.deterministic ? 0.0 : wall;
  summary["max_displacement"] = max_disp;
  summary["particles"] = sim.state.size();
  std::ofstream f(a.out + "/summary.json");
  if (!f) throw IoError("cannot open " + a.out + "/summary.json for writing");
  f << summary.dump(2) << "\n";

  std::cout << "simulate: " << sim.step_count << " steps, " << frames << " frames, "
            << sim.state.size() << " particles -> " << traj_path << "\n";
  return 0;
}

}  // namespace trom::cli
