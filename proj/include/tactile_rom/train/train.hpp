#pragma once

#include <chrono>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tactile_rom/core/rng.hpp"
#include "tactile_rom/rom/checkpoint.hpp"
#include "tactile_rom/train/adam.hpp"
#include "tactile_rom/train/dataset.hpp"
#include "tactile_rom/train/loss.hpp"

namespace trom::train {

struct TrainConfig {
  std::vector<int> hidden{48, 32, 24};
  int latent_dim = 64;
  int epochs = 300;
  int batch_size = 32;
  AdamParams adam;
  LossWeights weights;
  bool consistency = true;
  int early_stop_patience = 0;  // 0 disables early stopping
  std::uint64_t seed = 0;
  bool deterministic = false;
};

struct EpochLog {
  int epoch = 0;
  double rec = 0.0, cons_v = 0.0, cons_F = 0.0, val = 0.0, seconds = 0.0;
};

struct TrainResult {
  rom::Autoencoder<float> net;  // best-validation parameters
  rom::NormStats norm;
  int best_epoch = -1;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<EpochLog> log;
};

namespace detail {

// Gathers one normalized batch of (t-1, t) pairs from the dataset.
inline PairBatch<float> gather_batch(const Dataset& ds,
                                     const std::vector<std::pair<int, int>>& pairs,
                                     std::size_t first, std::size_t count) {
  const int dim = ds.dim();
  const int n = ds.enc.particle_count();
  PairBatch<float> b;
  b.frame_dt = ds.frame_dt;
  b.q_prev.resize(dim, count);
  b.q_cur.resize(dim, count);
  b.target_v.resize(3 * n, count);
  b.target_F.resize(9 * n, count);
  for (std::size_t i = 0; i < count; ++i) {
    auto [si, t] = pairs[first + i];
    const LoadedScenario& sc = ds.scenarios[si];
    b.q_prev.col(i) = sc.q.col(t - 1);
    b.q_cur.col(i) = sc.q.col(t);
    b.target_v.col(i) = sc.target_v.col(t);
    b.target_F.col(i) = sc.target_F.col(t);
  }
  ds.norm.normalize(b.q_prev);
  ds.norm.normalize(b.q_cur);
  return b;
}

inline std::vector<std::pair<int, int>> pair_index(const Dataset& ds, bool holdout) {
  std::vector<std::pair<int, int>> pairs;
  for (int si = 0; si < static_cast<int>(ds.scenarios.size()); ++si) {
    if (ds.scenarios[si].holdout != holdout) continue;
    // t = 0 has no predecessor and is skipped by construction.
    for (int t = 1; t < ds.scenarios[si].frames; ++t) pairs.emplace_back(si, t);
  }
  return pairs;
}

}  // namespace detail

// Mini-batch Adam over reconstruction (+ optional physics-consistency and
// decimated-subset) losses. Validation runs on the holdout scenarios; the
// best-validation parameters are kept and written to `checkpoint_path` (when
// non-empty) every time validation improves. Divergence (non-finite loss or
// gradients) raises NumericalError; the last good checkpoint stays on disk.
inline TrainResult train(const Dataset& ds, const TrainConfig& cfg,
                         const std::string& checkpoint_path = "",
                         const std::string& csv_path = "") {
  auto train_pairs = detail::pair_index(ds, false);
  auto val_pairs = detail::pair_index(ds, true);
  if (train_pairs.empty()) throw ConfigError("training set is empty");
  if (val_pairs.empty())
    throw ConfigError("no holdout scenario: mark at least one scenario holdout");

  rom::ArchDescriptor arch;
  arch.input_dim = ds.dim();
  arch.hidden = cfg.hidden;
  arch.latent_dim = cfg.latent_dim;

  TrainResult res;
  res.norm = ds.norm;
  res.net.build(arch);
  Rng rng(cfg.seed);
  res.net.init(rng);

  rom::Autoencoder<float>& net = res.net;
  std::vector<float> grad_enc(net.encoder.param_count());
  std::vector<float> grad_dec(net.decoder.param_count());
  AdamState<float> adam_enc, adam_dec;
  adam_enc.init(grad_enc.size());
  adam_dec.init(grad_dec.size());
  long long step = 0;

  std::vector<float> best_enc = net.encoder.params;
  std::vector<float> best_dec = net.decoder.params;

  std::ofstream csv;
  if (!csv_path.empty()) {
    csv.open(csv_path, std::ios::trunc);
    if (!csv) throw IoError("cannot open training log: " + csv_path);
    csv << "epoch,rec_loss,cons_v,cons_F,val_loss,seconds\n";
  }

  auto save_best = [&](int epoch, double val) {
    if (checkpoint_path.empty()) return;
    rom::Autoencoder<float> snap;
    snap.build(arch);
    snap.encoder.params = best_enc;
    snap.decoder.params = best_dec;
    nlohmann::json meta = {
        {"epoch", epoch},
        {"val_loss", val},
        {"seed", cfg.seed},
        {"consistency", cfg.consistency},
        {"frame_dt", ds.frame_dt},
        {"weights", {{"rec", cfg.weights.rec},
                     {"vel", cfg.weights.vel},
                     {"defgrad", cfg.weights.defgrad},
                     {"multiscale", cfg.weights.multiscale}}},
    };
    rom::save_checkpoint(checkpoint_path, snap, ds.norm, meta);
  };

  int epochs_since_best = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(train_pairs);

    EpochLog log;
    log.epoch = epoch;
    long done = 0;
    for (std::size_t first = 0; first < train_pairs.size();
         first += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t count =
          std::min<std::size_t>(cfg.batch_size, train_pairs.size() - first);
      PairBatch<float> batch = detail::gather_batch(ds, train_pairs, first, count);
      std::fill(grad_enc.begin(), grad_enc.end(), 0.0f);
      std::fill(grad_dec.begin(), grad_dec.end(), 0.0f);
      LossTerms L = loss_and_gradients(net, ds.norm, batch, cfg.weights,
                                       cfg.consistency, &grad_enc, &grad_dec);
      ++step;
      bool ok = std::isfinite(L.total());
      ok = ok && adam_step(net.encoder.params, grad_enc, adam_enc, step, cfg.adam);
      ok = ok && adam_step(net.decoder.params, grad_dec, adam_dec, step, cfg.adam);
      if (!ok)
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                             "; best checkpoint so far is kept");
      log.rec += L.rec * count;
      log.cons_v += L.cons_v * count;
      log.cons_F += L.cons_F * count;
      done += count;
    }
    log.rec /= done;
    log.cons_v /= done;
    log.cons_F /= done;

    double val = 0.0;
    for (std::size_t first = 0; first < val_pairs.size();
         first += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t count = std::min<std::size_t>(cfg.batch_size, val_pairs.size() - first);
      PairBatch<float> batch = detail::gather_batch(ds, val_pairs, first, count);
      val += loss_and_gradients<float>(net, ds.norm, batch, cfg.weights, cfg.consistency,
                                       nullptr, nullptr)
                 .total() *
             count;
    }
    log.val = val / val_pairs.size();
    if (!std::isfinite(log.val))
      throw NumericalError("validation loss diverged at epoch " + std::to_string(epoch));

    if (log.val < res.best_val) {
      res.best_val = log.val;
      res.best_epoch = epoch;
      best_enc = net.encoder.params;
      best_dec = net.decoder.params;
      save_best(epoch, log.val);
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }

    log.seconds = cfg.deterministic
                      ? 0.0
                      : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
    res.log.push_back(log);
    if (csv.is_open()) {
      csv << log.epoch << ',' << log.rec << ',' << log.cons_v << ',' << log.cons_F << ','
          << log.val << ',' << log.seconds << '\n';
      csv.flush();
    }
    if (cfg.early_stop_patience > 0 && epochs_since_best >= cfg.early_stop_patience) break;
  }

  net.encoder.params = best_enc;
  net.decoder.params = best_dec;
  return res;
}

}  // namespace trom::train
