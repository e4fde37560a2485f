#include <exception>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "tactile_rom/core/error.hpp"
#include "tactile_rom/core/parallel.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

void add_common(CLI::App* sub, trom::cli::Args& args) {
  sub->add_option("--config", args.config, "JSON config file")->required();
  sub->add_option("--seed", args.seed, "RNG seed");
  sub->add_flag("--deterministic", args.deterministic,
                "byte-stable outputs: zeroed wall times, fixed ordering");
  sub->add_option("--out", args.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  trom::init_threads_from_env();

  CLI::App app{"reduced-order tactile gel simulator"};
  app.require_subcommand(1);

  trom::cli::Args args;
  std::function<int(const trom::cli::Args&)> run;

  auto* sim = app.add_subcommand("simulate", "run the particle-grid press simulation");
  add_common(sim, args);
  sim->add_option("--frames", args.frames, "frame count override (0 writes a header-only file)");
  sim->callback([&] { run = trom::cli::cmd_simulate; });

  auto* gen = app.add_subcommand("gen-data", "generate paired two-resolution press datasets");
  add_common(gen, args);
  gen->callback([&] { run = trom::cli::cmd_gen_data; });

  auto* train = app.add_subcommand("train", "train the reduced-order autoencoder");
  add_common(train, args);
  train->callback([&] { run = trom::cli::cmd_train; });

  auto* roll = app.add_subcommand("rollout", "latent quasi-static rollout from a checkpoint");
  add_common(roll, args);
  roll->callback([&] { run = trom::cli::cmd_rollout; });

  auto* render = app.add_subcommand("render", "render trajectory frames to depth maps");
  add_common(render, args);
  render->callback([&] { run = trom::cli::cmd_render; });

  auto* eval = app.add_subcommand("eval", "compare trajectories or depth maps");
  add_common(eval, args);
  eval->add_flag("--ablate", args.ablate, "train + roll out the ablation variants");
  eval->callback([&] { run = trom::cli::cmd_eval; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    return run(args);
  } catch (const trom::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const trom::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const trom::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
