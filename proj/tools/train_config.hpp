#pragma once

#include <string>
#include <vector>

#include "tactile_rom/io/config.hpp"
#include "tactile_rom/train/train.hpp"

namespace trom::cli {

// Shared schema for the `train` command and the ablation orchestrator.
// `dataset` (path) is read by the caller; everything else lands in
// TrainConfig. Seed and deterministic come from the command line.
inline train::TrainConfig train_config_from_json(const io::Cfg& c) {
  c.allow({"dataset", "hidden", "latent_dim", "epochs", "batch_size", "adam", "weights",
           "consistency", "early_stop_patience"});
  train::TrainConfig cfg;
  if (c.has("hidden")) {
    const nlohmann::json& h = c.raw().at("hidden");
    if (!h.is_array() || h.empty()) c.fail("hidden must be a non-empty array of layer widths");
    cfg.hidden.clear();
    for (const auto& v : h) {
      if (!v.is_number_integer() || v.get<long>() < 1)
        c.fail("hidden widths must be positive integers");
      cfg.hidden.push_back(v.get<int>());
    }
  }
  cfg.latent_dim = static_cast<int>(c.integer("latent_dim", cfg.latent_dim));
  cfg.epochs = static_cast<int>(c.integer("epochs", cfg.epochs));
  cfg.batch_size = static_cast<int>(c.integer("batch_size", cfg.batch_size));
  if (cfg.latent_dim < 1) c.fail("latent_dim must be positive");
  if (cfg.epochs < 1) c.fail("epochs must be positive");
  if (cfg.batch_size < 1) c.fail("batch_size must be positive");
  if (c.has("adam")) {
    io::Cfg ad = c.child("adam");
    ad.allow({"lr", "beta1", "beta2", "eps"});
    cfg.adam.lr = ad.num("lr", cfg.adam.lr);
    cfg.adam.beta1 = ad.num("beta1", cfg.adam.beta1);
    cfg.adam.beta2 = ad.num("beta2", cfg.adam.beta2);
    cfg.adam.eps = ad.num("eps", cfg.adam.eps);
  }
  if (c.has("weights")) {
    io::Cfg w = c.child("weights");
    w.allow({"rec", "vel", "defgrad", "multiscale"});
    cfg.weights.rec = w.num("rec", cfg.weights.rec);
    cfg.weights.vel = w.num("vel", cfg.weights.vel);
    cfg.weights.defgrad = w.num("defgrad", cfg.weights.defgrad);
    cfg.weights.multiscale = w.num("multiscale", cfg.weights.multiscale);
  }
  cfg.consistency = c.boolean("consistency", cfg.consistency);
  cfg.early_stop_patience =
      static_cast<int>(c.integer("early_stop_patience", cfg.early_stop_patience));
  return cfg;
}

}  // namespace trom::cli
