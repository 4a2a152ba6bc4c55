#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace schubert::chunking {

inline constexpr std::size_t kDefaultChunkSize = 512;
inline constexpr std::size_t kDefaultOverlap = 50;
inline constexpr std::size_t kDefaultDim = 768;

struct TokenSequence {
  std::string source_id;
  std::vector<std::string> tokens;
};

/// Byte range of one token in the original text.
struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// A window [start, end) over a parent token sequence. `tokens` views the
/// parent's storage and must not outlive it.
struct Chunk {
  std::span<const std::string> tokens;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
};

/// Per-document chunk vectors stored chunk-major in `values`.
struct ChunkEmbeddings {
  std::string doc_id;
  std::uint32_t dim = 0;
  std::vector<float> values;
  std::optional<double> label;

  std::size_t n_chunks() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const float> chunk(std::size_t i) const {
    return std::span<const float>(values).subspan(i * dim, dim);
  }

  bool operator==(const ChunkEmbeddings&) const = default;
};

/// Whitespace-delimited token spans (Unicode whitespace).
std::vector<ByteSpan> token_spans(std::string_view text);

/// Splits on Unicode whitespace and lowercases.
TokenSequence tokenize(std::string_view text, std::string source_id = {});

/// Windows of `chunk_size` tokens advancing by chunk_size - overlap,
/// stopping at the first window that reaches the end of the sequence.
/// Throws InvalidInput for an empty sequence or overlap >= chunk_size.
std::vector<Chunk> chunk(const TokenSequence& tokens, std::size_t chunk_size = kDefaultChunkSize,
                         std::size_t overlap = kDefaultOverlap);

/// Closed-form chunk count for n tokens (n >= 1).
std::size_t chunk_count(std::size_t n, std::size_t chunk_size, std::size_t overlap);

/// Component-wise mean. Throws InvalidInput on empty or ragged input.
std::vector<double> mean_pool(const std::vector<std::vector<double>>& token_vectors);

/// Deterministic stand-in for transformer chunk embeddings: FNV-1a over the
/// newline-joined tokens seeds a splitmix64 stream mapped into [-1, 1).
std::vector<float> pseudo_embed(const Chunk& chunk, std::size_t dim);

/// tokenize -> chunk -> pseudo_embed for one document.
ChunkEmbeddings embed_document_pseudo(std::string doc_id, std::string_view text,
                                      std::size_t chunk_size = kDefaultChunkSize,
                                      std::size_t overlap = kDefaultOverlap,
                                      std::size_t dim = kDefaultDim);

/// Number of Unicode code points in UTF-8 text.
std::size_t count_code_points(std::string_view text);

}  // namespace schubert::chunking
