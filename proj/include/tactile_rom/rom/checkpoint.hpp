#pragma once

#include <string>

#include <json.hpp>

#include "tactile_rom/rom/autoencoder.hpp"
#include "tactile_rom/rom/encoding.hpp"

namespace trom::rom {

// Checkpoint file: "ROMW" magic, u32 format version, u64 JSON header length,
// the JSON header (architecture, normalization stats, free-form metadata),
// then all parameters as little-endian f32 in flat layout order: every
// encoder layer, then every decoder layer.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Autoencoder<float> net;
  NormStats norm;
  nlohmann::json metadata;
};

void save_checkpoint(const std::string& path, const Autoencoder<float>& net,
                     const NormStats& norm, const nlohmann::json& metadata);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace trom::rom
