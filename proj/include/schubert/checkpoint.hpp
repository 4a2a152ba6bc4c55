#pragma once

#include <filesystem>

#include "schubert/gru.hpp"

namespace schubert::model {

/// Model checkpoint ("SCHP", version 1, little-endian):
///   magic[4] version:u32 dim_in:u32 hidden:u32
///   f64 tensors in GruParams field order; matrices row-major.
inline constexpr char kCheckpointMagic[4] = {'S', 'C', 'H', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::filesystem::path& path, const GruParams& params);

/// Throws FormatError on bad magic, version, or truncation.
GruParams read_checkpoint(const std::filesystem::path& path);

}  // namespace schubert::model
