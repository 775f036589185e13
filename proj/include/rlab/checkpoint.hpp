#pragma once

#include <cstdint>
#include <filesystem>

#include "rlab/model.hpp"

namespace rlab {

// Checkpoint layout (little-endian):
//   "RLAB" | u32 format version | u64 architecture hash
//   then per tensor, in BasicWeights::for_each order, until end of file:
//   u32 name length | name bytes | u32 rank | u32 dims[rank] | f32 payload
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const ModelWeights& weights);

/// Model dims are recovered from tensor shapes and re-hashed against the
/// header. Missing file -> ErrorKind::missing_artifact; malformed -> io.
ModelWeights load_checkpoint(const std::filesystem::path& path);

}  // namespace rlab
