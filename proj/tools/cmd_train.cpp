#include <filesystem>
#include <iostream>

#include "commands.hpp"
#include "tactile_rom/train/dataset.hpp"
#include "tactile_rom/train/train.hpp"
#include "train_config.hpp"

namespace trom::cli {

int cmd_train(const Args& a) {
  nlohmann::json j = io::load_json(a.config);
  io::Cfg c(j, a.config);
  train::TrainConfig cfg = train_config_from_json(c);
  cfg.seed = a.seed;
  cfg.deterministic = a.deterministic;
  const std::string dataset_dir = c.str("dataset");

  train::Dataset ds = train::load_dataset(dataset_dir);
  std::filesystem::create_directories(a.out);
  train::TrainResult res =
      train::train(ds, cfg, a.out + "/checkpoint.ckpt", a.out + "/train_log.csv");

  std::cout << "train: best validation " << res.best_val << " at epoch " << res.best_epoch
            << " over " << ds.training_pairs() << " pairs -> " << a.out << "/checkpoint.ckpt\n";
  return 0;
}

}  // namespace trom::cli
