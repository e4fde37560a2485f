#pragma once

#include <cstdint>
#include <string>

namespace trom::cli {

struct Args {
  std::string config;
  std::uint64_t seed = 0;
  bool deterministic = false;
  std::string out = ".";
  long frames = -1;    // simulate: overrides the config frame count
  bool ablate = false; // eval: run the ablation table
};

int cmd_simulate(const Args& a);
int cmd_gen_data(const Args& a);
int cmd_train(const Args& a);
int cmd_rollout(const Args& a);
int cmd_render(const Args& a);
int cmd_eval(const Args& a);

}  // namespace trom::cli
