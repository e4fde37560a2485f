#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "commands.hpp"
#include "tactile_rom/io/config.hpp"
#include "tactile_rom/train/dataset.hpp"

namespace trom::cli {

int cmd_gen_data(const Args& a) {
  nlohmann::json j = io::load_json(a.config);
  io::Cfg c(j, a.config);
  train::GenConfig cfg = train::gen_config_from_json(c);

  std::filesystem::create_directories(a.out);
  train::generate_dataset(cfg, a.out, a.seed, a.deterministic);
  std::cout << "gen-data: " << cfg.scenarios.size() << " scenarios -> " << a.out << "\n";
  return 0;
}

}  // namespace trom::cli
