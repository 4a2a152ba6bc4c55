#pragma once

#include <filesystem>
#include <vector>

#include "schubert/chunking.hpp"

namespace schubert::chunking {

/// Chunk-embedding container ("SCHB", version 1, little-endian):
///   magic[4] version:u32 count:u64
///   per item: id_len:u16 id[id_len] n_chunks:u32 dim:u32
///             f32[n_chunks*dim] (chunk-major) has_label:u8 [label:f64]
inline constexpr char kEmbeddingMagic[4] = {'S', 'C', 'H', 'B'};
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

/// Throws InvalidInput for items that cannot be encoded (empty, ragged,
/// id longer than 65535 bytes) and StorageFailure on I/O errors.
void write_embeddings(const std::filesystem::path& path, const std::vector<ChunkEmbeddings>& items);

/// Throws FormatError with the byte offset of the first undecodable field.
std::vector<ChunkEmbeddings> read_embeddings(const std::filesystem::path& path);

}  // namespace schubert::chunking
