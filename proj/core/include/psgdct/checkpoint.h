#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "psgdct/model.h"

namespace psgdct {

struct TrainingMetadata {
  std::size_t epochs = 0;
  std::size_t steps = 0;
  std::size_t best_epoch = 0;
  double final_loss = 0.0;
  double best_validation = 0.0;
  std::uint64_t seed = 0;
};

struct ModelCheckpoint {
  ModelConfig config;
  std::vector<double> parameters;
  Standardizer statics;
  TrainingMetadata meta;

  Model model() const { return Model(config, parameters); }
};

// Binary layout, little-endian throughout:
//   8 bytes  magic "PSGDCTCK"
//   u16      major version (1), u16 minor version (0)
//   u32      header length L
//   L bytes  UTF-8 JSON header: config, static standardization, metadata
//   u64      parameter count P
//   P x f64  parameters in ParameterLayout order
inline constexpr char kCheckpointMagic[8] = {'P', 'S', 'G', 'D', 'C', 'T', 'C', 'K'};
inline constexpr std::uint16_t kCheckpointMajor = 1;
inline constexpr std::uint16_t kCheckpointMinor = 0;

std::string serialize_checkpoint(const ModelCheckpoint& ckpt);
ModelCheckpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace psgdct
