#include <filesystem>
#include <iostream>

#include "commands.hpp"
#include "tactile_rom/latent/rollout.hpp"
#include "tactile_rom/rom/checkpoint.hpp"

namespace trom::cli {

int cmd_rollout(const Args& a) {
  nlohmann::json j = io::load_json(a.config);
  io::Cfg c(j, a.config);
  latent::RolloutConfig cfg = latent::rollout_config_from_json(c);
  if (cfg.checkpoint.empty()) c.fail("checkpoint path is required");
  rom::Checkpoint ck = rom::load_checkpoint(cfg.checkpoint);

  std::filesystem::create_directories(a.out);
  latent::RolloutResult res = latent::run_rollout(cfg, ck, a.seed, a.deterministic,
                                                  a.out + "/rollout.traj",
                                                  a.out + "/rollout_stats.json");

  int stalled = 0;
  for (const auto& s : res.stats) stalled += s.stalled ? 1 : 0;
  std::cout << "rollout: " << res.stats.size() << " frames (" << stalled << " stalled) -> "
            << a.out << "/rollout.traj\n";
  return 0;
}

}  // namespace trom::cli
