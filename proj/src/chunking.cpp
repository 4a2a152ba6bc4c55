#include "schubert/chunking.hpp"

#include <algorithm>
#include <cmath>

#include "schubert/error.hpp"
#include "schubert/text_util.hpp"

namespace schubert::chunking {

std::vector<ByteSpan> token_spans(std::string_view text) {
  std::vector<ByteSpan> spans;
  std::size_t pos = 0;
  std::size_t token_start = 0;
  bool in_token = false;
  while (pos < text.size()) {
    const std::size_t here = pos;
    const char32_t cp = text::decode_utf8(text, pos);
    if (text::is_unicode_space(cp)) {
      if (in_token) spans.push_back({token_start, here});
      in_token = false;
    } else if (!in_token) {
      token_start = here;
      in_token = true;
    }
  }
  if (in_token) spans.push_back({token_start, text.size()});
  return spans;
}

TokenSequence tokenize(std::string_view text, std::string source_id) {
  TokenSequence seq;
  seq.source_id = std::move(source_id);
  const auto spans = token_spans(text);
  seq.tokens.reserve(spans.size());
  for (const auto& s : spans) seq.tokens.push_back(text::to_lower(text.substr(s.begin, s.end - s.begin)));
  return seq;
}

std::size_t chunk_count(std::size_t n, std::size_t chunk_size, std::size_t overlap) {
  if (n <= chunk_size) return 1;
  const std::size_t stride = chunk_size - overlap;
  return 1 + (n - chunk_size + stride - 1) / stride;
}

std::vector<Chunk> chunk(const TokenSequence& tokens, std::size_t chunk_size, std::size_t overlap) {
  if (tokens.tokens.empty()) throw InvalidInput("cannot chunk an empty token sequence");
  if (chunk_size == 0 || overlap >= chunk_size) {
    throw InvalidInput("chunking needs 0 <= overlap < chunk_size (got chunk_size=" +
                       std::to_string(chunk_size) + ", overlap=" + std::to_string(overlap) + ")");
  }
  const std::size_t n = tokens.tokens.size();
  const std::size_t stride = chunk_size - overlap;
  const std::span<const std::string> all(tokens.tokens);

  std::vector<Chunk> out;
  out.reserve(chunk_count(n, chunk_size, overlap));
  for (std::size_t start = 0;; start += stride) {
    const std::size_t end = std::min(start + chunk_size, n);
    out.push_back(Chunk{all.subspan(start, end - start), start, end});
    if (end == n) break;
  }
  return out;
}

std::vector<double> mean_pool(const std::vector<std::vector<double>>& token_vectors) {
  if (token_vectors.empty()) throw InvalidInput("mean_pool needs at least one vector");
  const std::size_t dim = token_vectors.front().size();
  std::vector<double> sum(dim, 0.0);
  for (const auto& v : token_vectors) {
    if (v.size() != dim) {
      throw InvalidInput("mean_pool got ragged vectors (" + std::to_string(v.size()) + " vs " +
                         std::to_string(dim) + ")");
    }
    for (std::size_t i = 0; i < dim; ++i) sum[i] += v[i];
  }
  const double n = static_cast<double>(token_vectors.size());
  for (auto& s : sum) s /= n;
  return sum;
}

std::vector<float> pseudo_embed(const Chunk& chunk, std::size_t dim) {
  if (dim == 0) throw InvalidInput("embedding dim must be >= 1");
  std::uint64_t seed = 0xcbf29ce484222325ULL;
  bool first = true;
  for (const auto& tok : chunk.tokens) {
    if (!first) seed = text::fnv1a64("\n", seed);
    seed = text::fnv1a64(tok, seed);
    first = false;
  }
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double u = text::unit_interval(text::splitmix64(seed + 1 + i));
    // double -> float conversion rounds to nearest even under the default FP environment.
    out[i] = static_cast<float>(2.0 * u - 1.0);
  }
  return out;
}

ChunkEmbeddings embed_document_pseudo(std::string doc_id, std::string_view text,
                                      std::size_t chunk_size, std::size_t overlap,
                                      std::size_t dim) {
  const auto seq = tokenize(text, doc_id);
  const auto chunks = chunk(seq, chunk_size, overlap);
  ChunkEmbeddings out;
  out.doc_id = std::move(doc_id);
  out.dim = static_cast<std::uint32_t>(dim);
  out.values.reserve(chunks.size() * dim);
  for (const auto& c : chunks) {
    const auto v = pseudo_embed(c, dim);
    out.values.insert(out.values.end(), v.begin(), v.end());
  }
  return out;
}

std::size_t count_code_points(std::string_view text) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    text::decode_utf8(text, pos);
    ++n;
  }
  return n;
}

}  // namespace schubert::chunking
