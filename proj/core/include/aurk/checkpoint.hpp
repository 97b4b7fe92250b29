#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aurk/model.hpp"
#include "aurk/optim.hpp"

namespace aurk {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Decoded checkpoint. See FORMATS.md for the byte layout (little-endian).
struct Checkpoint {
  std::string dataset;
  std::uint64_t table_hash = 0;
  ModelConfig model;
  std::vector<Param> params;
  std::optional<OptimState> optim;
};

std::vector<std::uint8_t> encode_checkpoint(const AuRcnn& model, const std::string& dataset,
                                            std::uint64_t table_hash, const OptimState* optim);
/// Throws FormatError on truncated or malformed bytes and VersionError on an
/// unknown format version.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::string& path, const AuRcnn& model, const std::string& dataset,
                     std::uint64_t table_hash, const OptimState* optim);
Checkpoint load_checkpoint(const std::string& path);

/// Throws VersionError when the checkpoint was written for another dataset
/// profile, partition table or model shape.
void check_compatible(const Checkpoint& ckpt, const std::string& dataset, std::uint64_t table_hash,
                      const ModelConfig& model);

/// Builds the model described by the checkpoint and loads its weights.
AuRcnn restore_model(const Checkpoint& ckpt);
/// Copies weights into `model`; names and shapes must match (VersionError).
void load_weights(AuRcnn& model, std::span<const Param> params);

}  // namespace aurk
