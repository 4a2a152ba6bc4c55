#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace schubert::corpus {

/// One paper from a scholarly-corpus dump. Author names are lowercased at
/// parse time; `year` is absent when missing, malformed, or outside [1000, 3000].
struct ArticleRecord {
  std::string article_id;
  std::string title;
  std::vector<std::string> authors;
  std::optional<int> year;
  std::vector<std::string> in_citations;
  std::vector<std::string> out_citations;
  std::optional<std::string> journal;
  std::optional<std::string> volume;
  std::optional<std::string> pages;
  std::optional<std::string> doi;

  bool operator==(const ArticleRecord&) const = default;
};

/// Parses one dump line (a JSON object). Throws MalformedLine.
ArticleRecord parse_record(std::string_view json_line);

/// Applies the sanity bound; values outside [1000, 3000] become absent.
std::optional<int> sanitize_year(std::optional<long long> year);

/// Brings a record into stored form: lowercased authors, deduplicated
/// citation lists, sanitized year. parse_record output is already normalized.
ArticleRecord normalize(ArticleRecord record);

/// Read-only handle to a finished store. Lookups are safe from many threads.
class CorpusStore {
 public:
  /// Throws StorageFailure when the file is missing, is not a corpus store,
  /// has a different format version, or was left incomplete by a failed build.
  static CorpusStore open(const std::filesystem::path& path);

  CorpusStore(CorpusStore&&) noexcept;
  CorpusStore& operator=(CorpusStore&&) noexcept;
  ~CorpusStore();

  /// Ids of articles with an author equal to lowercase(name), ascending.
  std::vector<std::string> lookup_by_author(std::string_view name) const;

  std::optional<ArticleRecord> lookup_by_id(std::string_view article_id) const;

  /// Cheaper than lookup_by_id when only the year is needed. The outer
  /// optional is empty when the article is not stored.
  std::optional<std::optional<int>> lookup_year(std::string_view article_id) const;

  std::uint64_t article_count() const;
  std::uint64_t author_row_count() const;

  /// Visits every stored article in ascending id order.
  void for_each_article(const std::function<void(const ArticleRecord&)>& fn) const;

 private:
  struct Impl;
  explicit CorpusStore(std::unique_ptr<Impl> impl);

  std::unique_ptr<Impl> impl_;
};

/// Single-writer bulk loader. The file is flagged complete only by finish();
/// a writer destroyed without finish() leaves a store that open() rejects.
class StoreWriter {
 public:
  /// Replaces any existing file at `path`.
  explicit StoreWriter(const std::filesystem::path& path);
  StoreWriter(StoreWriter&&) noexcept;
  StoreWriter& operator=(StoreWriter&&) noexcept;
  ~StoreWriter();

  /// Last write wins when the same article_id is added twice.
  void add(const ArticleRecord& record);

  /// Builds the author-name index and seals the store.
  CorpusStore finish();

  std::uint64_t records_added() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

CorpusStore build_store(std::span<const ArticleRecord> records,
                        const std::filesystem::path& path);

struct IngestOptions {
  unsigned workers = 1;
  std::size_t batch_lines = 4096;
};

struct IngestReport {
  std::uint64_t lines = 0;
  std::uint64_t records = 0;
  std::uint64_t malformed = 0;
};

/// Streams JSON-lines dump files (plain or gzip) into a new store at
/// `store_path`. Malformed lines are skipped and counted. With workers > 1,
/// batches are parsed in parallel and committed in input order.
IngestReport ingest_dumps(std::span<const std::filesystem::path> dump_files,
                          const std::filesystem::path& store_path,
                          const IngestOptions& options = {});

}  // namespace schubert::corpus
