#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "schubert/chunking.hpp"
#include "schubert/citation_resolver.hpp"
#include "schubert/corpus_store.hpp"
#include "schubert/gru.hpp"
#include "schubert/rng.hpp"

namespace schubert::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Serializes a record in dump form (`id`, `inCitations`, author objects).
std::string to_dump_line(const corpus::ArticleRecord& record);

struct CorpusSpec {
  std::size_t records = 1000;
  std::size_t author_pool = 300;
  std::size_t title_pool = 250;  ///< small pools force title collisions
  std::size_t max_citations = 12;
  double missing_year_rate = 0.1;
  double dangling_citation_rate = 0.05;
};

/// Deterministic synthetic corpus. Record i is a pure function of (seed, i),
/// so large corpora can be regenerated on demand for spot checks.
corpus::ArticleRecord synthetic_record(std::uint64_t seed, std::size_t i, const CorpusSpec& spec);
std::vector<corpus::ArticleRecord> synthetic_corpus(std::uint64_t seed, const CorpusSpec& spec);
std::string synthetic_id(std::size_t i);
std::string synthetic_author(std::size_t k);
std::string synthetic_title(std::size_t k);

/// Queries mixing exact hits, case variants, one-author hits and misses.
std::vector<citations::ArticleQuery> synthetic_queries(const std::vector<corpus::ArticleRecord>& records,
                                                       std::size_t count, std::uint64_t seed,
                                                       const CorpusSpec& spec);

/// Resolution by scanning every record; duplicates resolve to the last copy.
std::optional<std::pair<std::string, citations::YearGroupedCitations>> linear_scan_find(
    const std::vector<corpus::ArticleRecord>& records, const citations::ArticleQuery& query);

/// Chunk windows from the plain emission loop.
std::vector<std::pair<std::size_t, std::size_t>> brute_force_windows(std::size_t n,
                                                                     std::size_t chunk_size,
                                                                     std::size_t overlap);

/// Whitespace-separated text of `n` tokens drawn from a small vocabulary.
std::string random_text(Rng& rng, std::size_t n);

chunking::ChunkEmbeddings random_item(Rng& rng, std::size_t index);

/// Documents with pseudo-embeddings of random length (in tokens).
std::vector<chunking::ChunkEmbeddings> pseudo_documents(std::size_t count, std::size_t min_tokens,
                                                        std::size_t max_tokens, std::size_t chunk_size,
                                                        std::size_t overlap, std::size_t dim,
                                                        std::uint64_t seed);

/// Mean over every component of every chunk.
double mean_component(const chunking::ChunkEmbeddings& item);

/// Random parameters with entries in [-scale, scale].
model::GruParams random_params(Eigen::Index dim_in, Eigen::Index hidden, Rng& rng, double scale);

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

/// Compares backward() of the batch MAE with central differences of mae_loss,
/// recomputing dropout masks from the same seed at every evaluation.
GradientCheck check_gradients(const model::GruParams& params, const std::vector<model::Matrix>& inputs,
                              const std::vector<double>& labels, double dropout_p,
                              std::uint64_t mask_seed, double step);

}  // namespace schubert::testing
