#include "tactile_rom/rom/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "tactile_rom/core/error.hpp"

namespace trom::rom {

namespace {

constexpr char kMagic[4] = {'R', 'O', 'M', 'W'};

nlohmann::json arch_to_json(const ArchDescriptor& a) {
  return {{"input_dim", a.input_dim}, {"hidden", a.hidden}, {"latent_dim", a.latent_dim}};
}

ArchDescriptor arch_from_json(const nlohmann::json& j) {
  ArchDescriptor a;
  a.input_dim = j.at("input_dim").get<int>();
  a.hidden = j.at("hidden").get<std::vector<int>>();
  a.latent_dim = j.at("latent_dim").get<int>();
  return a;
}

}  // namespace

void save_checkpoint(const std::string& path, const Autoencoder<float>& net,
                     const NormStats& norm, const nlohmann::json& metadata) {
  nlohmann::json header = {
      {"architecture", arch_to_json(net.arch)},
      {"normalization", norm},
      {"metadata", metadata},
  };
  const std::string header_str = header.dump();

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path);
  f.write(kMagic, 4);
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t json_len = header_str.size();
  f.write(reinterpret_cast<const char*>(&version), sizeof version);
  f.write(reinterpret_cast<const char*>(&json_len), sizeof json_len);
  f.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  f.write(reinterpret_cast<const char*>(net.encoder.params.data()),
          static_cast<std::streamsize>(net.encoder.params.size() * sizeof(float)));
  f.write(reinterpret_cast<const char*>(net.decoder.params.data()),
          static_cast<std::streamsize>(net.decoder.params.size() * sizeof(float)));
  if (!f) throw IoError("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);

  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t json_len = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&version), sizeof version);
  f.read(reinterpret_cast<char*>(&json_len), sizeof json_len);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a checkpoint file: " + path);
  if (version != kCheckpointVersion)
    throw IoError("checkpoint version " + std::to_string(version) + " unsupported (need " +
                  std::to_string(kCheckpointVersion) + "): " + path);

  std::string header_str(json_len, '\0');
  f.read(header_str.data(), static_cast<std::streamsize>(json_len));
  if (!f) throw IoError("truncated checkpoint header: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("corrupt checkpoint header: " + path + ": " + e.what());
  }

  Checkpoint ck;
  try {
    ck.net.build(arch_from_json(header.at("architecture")));
    header.at("normalization").get_to(ck.norm);
    ck.metadata = header.value("metadata", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw IoError("invalid checkpoint header: " + path + ": " + e.what());
  }

  f.read(reinterpret_cast<char*>(ck.net.encoder.params.data()),
         static_cast<std::streamsize>(ck.net.encoder.params.size() * sizeof(float)));
  f.read(reinterpret_cast<char*>(ck.net.decoder.params.data()),
         static_cast<std::streamsize>(ck.net.decoder.params.size() * sizeof(float)));
  if (!f) throw IoError("truncated checkpoint parameter blob: " + path);
  // Exactly the declared parameters, nothing more.
  f.peek();
  if (!f.eof()) throw IoError("checkpoint has trailing bytes: " + path);
  return ck;
}

}  // namespace trom::rom
