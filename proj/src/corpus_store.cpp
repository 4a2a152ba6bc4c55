#include "schubert/corpus_store.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>
#include <thread>
#include <unordered_set>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "schubert/error.hpp"
#include "schubert/text_util.hpp"
#include "sqlite_handle.hpp"

namespace schubert::corpus {

namespace {

using nlohmann::json;
using detail::Statement;

// "SCHS" in the sqlite header's application_id slot.
constexpr int kApplicationId = 0x53434853;
constexpr int kFormatVersion = 1;
constexpr std::uint64_t kCommitEvery = 20000;

std::optional<long long> parse_year_value(const json& v) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 1e15) {
      return static_cast<long long>(d);
    }
    return std::nullopt;
  }
  if (v.is_string()) {
    const auto s = text::trim(v.get_ref<const std::string&>());
    if (s.empty()) return std::nullopt;
    long long out = 0;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return out;
  }
  return std::nullopt;
}

std::vector<std::string> unique_ids(const json& arr) {
  std::vector<std::string> out;
  if (!arr.is_array()) return out;
  std::unordered_set<std::string> seen;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_string()) continue;
    const auto& s = v.get_ref<const std::string&>();
    if (s.empty()) continue;
    if (seen.insert(s).second) out.push_back(s);
  }
  return out;
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return std::nullopt;
  const auto& s = it->get_ref<const std::string&>();
  if (s.empty()) return std::nullopt;
  return s;
}

std::string encode_list(const std::vector<std::string>& items) { return json(items).dump(); }

std::vector<std::string> decode_list(const std::string& text) {
  if (text.empty()) return {};
  return json::parse(text).get<std::vector<std::string>>();
}

void configure_bulk_load(sqlite3* db) {
  detail::exec(db, "PRAGMA journal_mode=OFF");
  detail::exec(db, "PRAGMA synchronous=OFF");
  detail::exec(db, "PRAGMA locking_mode=EXCLUSIVE");
  detail::exec(db, "PRAGMA cache_size=-65536");
  detail::exec(db, "PRAGMA temp_store=FILE");
}

}  // namespace

std::optional<int> sanitize_year(std::optional<long long> year) {
  if (!year || *year < 1000 || *year > 3000) return std::nullopt;
  return static_cast<int>(*year);
}

ArticleRecord normalize(ArticleRecord record) {
  for (auto& a : record.authors) a = text::to_lower(a);
  std::erase_if(record.authors, [](const std::string& a) { return a.empty(); });
  const auto dedupe = [](std::vector<std::string>& ids) {
    std::unordered_set<std::string> seen;
    std::erase_if(ids, [&](const std::string& id) { return id.empty() || !seen.insert(id).second; });
  };
  dedupe(record.in_citations);
  dedupe(record.out_citations);
  if (record.year) record.year = sanitize_year(*record.year);
  return record;
}

ArticleRecord parse_record(std::string_view json_line) {
  json obj = json::parse(json_line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) {
    throw MalformedLine("line is not a well-formed JSON object");
  }
  const auto id = obj.find("id");
  if (id == obj.end() || !id->is_string() || id->get_ref<const std::string&>().empty()) {
    throw MalformedLine("line lacks a non-empty string `id`");
  }

  ArticleRecord r;
  r.article_id = id->get<std::string>();
  if (const auto t = obj.find("title"); t != obj.end() && t->is_string()) {
    r.title = t->get<std::string>();
  }
  if (const auto a = obj.find("authors"); a != obj.end() && a->is_array()) {
    for (const auto& entry : *a) {
      const json* name = nullptr;
      if (entry.is_string()) {
        name = &entry;
      } else if (entry.is_object()) {
        const auto n = entry.find("name");
        if (n != entry.end() && n->is_string()) name = &*n;
      }
      if (name == nullptr) continue;
      auto lowered = text::to_lower(name->get_ref<const std::string&>());
      if (!lowered.empty()) r.authors.push_back(std::move(lowered));
    }
  }
  if (const auto y = obj.find("year"); y != obj.end()) {
    r.year = sanitize_year(parse_year_value(*y));
  }
  if (const auto c = obj.find("inCitations"); c != obj.end()) r.in_citations = unique_ids(*c);
  if (const auto c = obj.find("outCitations"); c != obj.end()) r.out_citations = unique_ids(*c);
  r.journal = optional_string(obj, "journalName");
  r.volume = optional_string(obj, "journalVolume");
  r.pages = optional_string(obj, "journalPages");
  r.doi = optional_string(obj, "doi");
  return r;
}

// ---------------------------------------------------------------------------
// Reader

struct CorpusStore::Impl {
  detail::DbHandle db;
  mutable std::mutex mu;
  mutable Statement by_author;
  mutable Statement by_id;
  mutable Statement year_by_id;
};

CorpusStore::CorpusStore(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
CorpusStore::CorpusStore(CorpusStore&&) noexcept = default;
CorpusStore& CorpusStore::operator=(CorpusStore&&) noexcept = default;
CorpusStore::~CorpusStore() = default;

CorpusStore CorpusStore::open(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw StorageFailure("corpus store not found: " + path.string());
  }
  sqlite3* raw = nullptr;
  const int rc = sqlite3_open_v2(path.c_str(), &raw,
                                 SQLITE_OPEN_READONLY | SQLITE_OPEN_FULLMUTEX, nullptr);
  detail::DbHandle db(raw);
  if (rc != SQLITE_OK) {
    throw StorageFailure("cannot open corpus store " + path.string() + ": " +
                         sqlite3_errmsg(raw));
  }

  {
    Statement app(db.get(), "PRAGMA application_id");
    app.step();
    if (app.int64(0) != kApplicationId) {
      throw StorageFailure(path.string() + " is not a corpus store (bad magic)");
    }
    Statement ver(db.get(), "PRAGMA user_version");
    ver.step();
    if (ver.int64(0) != kFormatVersion) {
      throw StorageFailure(path.string() + ": unsupported corpus store version " +
                           std::to_string(ver.int64(0)) + " (expected " +
                           std::to_string(kFormatVersion) + ")");
    }
    Statement complete(db.get(), "SELECT value FROM meta WHERE key = 'complete'");
    if (!complete.step() || complete.text(0) != "1") {
      throw StorageFailure(path.string() + ": store is incomplete (build failed or was interrupted)");
    }
  }

  auto impl = std::make_unique<Impl>();
  impl->by_author = Statement(db.get(),
                              "SELECT article_id FROM Authors WHERE author_name = ?1 "
                              "ORDER BY article_id");
  impl->by_id = Statement(db.get(),
                          "SELECT article_id, title, authors, year, in_citations, out_citations, "
                          "journal, volume, pages, doi FROM Articles WHERE article_id = ?1");
  impl->year_by_id = Statement(db.get(), "SELECT year FROM Articles WHERE article_id = ?1");
  impl->db = std::move(db);
  return CorpusStore(std::move(impl));
}

std::vector<std::string> CorpusStore::lookup_by_author(std::string_view name) const {
  const std::string key = text::to_lower(name);
  std::lock_guard lock(impl_->mu);
  auto& st = impl_->by_author;
  st.reset();
  st.bind(1, key);
  std::vector<std::string> ids;
  while (st.step()) {
    auto id = st.text(0);
    // (article_id, author_name) is unique, so ids arrive distinct.
    ids.push_back(std::move(id));
  }
  st.reset();
  return ids;
}

namespace {

ArticleRecord read_article_row(const Statement& st) {
  ArticleRecord r;
  r.article_id = st.text(0);
  r.title = st.text(1);
  r.authors = decode_list(st.text(2));
  r.year = st.optional_int(3);
  r.in_citations = decode_list(st.text(4));
  r.out_citations = decode_list(st.text(5));
  r.journal = st.optional_text(6);
  r.volume = st.optional_text(7);
  r.pages = st.optional_text(8);
  r.doi = st.optional_text(9);
  return r;
}

}  // namespace

std::optional<ArticleRecord> CorpusStore::lookup_by_id(std::string_view article_id) const {
  if (article_id.empty()) return std::nullopt;
  std::lock_guard lock(impl_->mu);
  auto& st = impl_->by_id;
  st.reset();
  st.bind(1, article_id);
  std::optional<ArticleRecord> out;
  if (st.step()) out = read_article_row(st);
  st.reset();
  return out;
}

std::optional<std::optional<int>> CorpusStore::lookup_year(std::string_view article_id) const {
  if (article_id.empty()) return std::nullopt;
  std::lock_guard lock(impl_->mu);
  auto& st = impl_->year_by_id;
  st.reset();
  st.bind(1, article_id);
  std::optional<std::optional<int>> out;
  if (st.step()) out = st.optional_int(0);
  st.reset();
  return out;
}

std::uint64_t CorpusStore::article_count() const {
  std::lock_guard lock(impl_->mu);
  Statement st(impl_->db.get(), "SELECT COUNT(*) FROM Articles");
  st.step();
  return static_cast<std::uint64_t>(st.int64(0));
}

std::uint64_t CorpusStore::author_row_count() const {
  std::lock_guard lock(impl_->mu);
  Statement st(impl_->db.get(), "SELECT COUNT(*) FROM Authors");
  st.step();
  return static_cast<std::uint64_t>(st.int64(0));
}

void CorpusStore::for_each_article(const std::function<void(const ArticleRecord&)>& fn) const {
  std::lock_guard lock(impl_->mu);
  Statement st(impl_->db.get(),
               "SELECT article_id, title, authors, year, in_citations, out_citations, "
               "journal, volume, pages, doi FROM Articles ORDER BY article_id");
  while (st.step()) fn(read_article_row(st));
}

// ---------------------------------------------------------------------------
// Writer

struct StoreWriter::Impl {
  std::filesystem::path path;
  detail::DbHandle db;
  Statement insert_article;
  Statement delete_authors;
  Statement insert_author;
  std::uint64_t added = 0;
  std::uint64_t pending = 0;
  bool in_txn = false;
};

StoreWriter::StoreWriter(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  std::error_code ec;
  std::filesystem::remove(path, ec);
  if (ec) throw StorageFailure("cannot replace " + path.string() + ": " + ec.message());

  sqlite3* raw = nullptr;
  const int rc = sqlite3_open_v2(path.c_str(), &raw,
                                 SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr);
  impl_->db.reset(raw);
  if (rc != SQLITE_OK) {
    throw StorageFailure("cannot create corpus store " + path.string() + ": " +
                         sqlite3_errmsg(raw));
  }
  sqlite3* db = impl_->db.get();
  configure_bulk_load(db);
  detail::exec(db, ("PRAGMA application_id=" + std::to_string(kApplicationId)).c_str());
  detail::exec(db, ("PRAGMA user_version=" + std::to_string(kFormatVersion)).c_str());
  detail::exec(db,
               "CREATE TABLE meta (key TEXT PRIMARY KEY, value TEXT NOT NULL);"
               "INSERT INTO meta VALUES ('complete', '0');"
               "CREATE TABLE Articles ("
               "  article_id TEXT PRIMARY KEY NOT NULL,"
               "  title TEXT NOT NULL,"
               "  title_lower TEXT NOT NULL,"
               "  authors TEXT NOT NULL,"
               "  year INTEGER,"
               "  in_citations TEXT NOT NULL,"
               "  out_citations TEXT NOT NULL,"
               "  journal TEXT, volume TEXT, pages TEXT, doi TEXT);"
               "CREATE TABLE Authors ("
               "  article_id TEXT NOT NULL,"
               "  author_name TEXT NOT NULL,"
               "  PRIMARY KEY (article_id, author_name)) WITHOUT ROWID;");

  impl_->insert_article = Statement(
      db,
      "INSERT OR REPLACE INTO Articles (article_id, title, title_lower, authors, year, "
      "in_citations, out_citations, journal, volume, pages, doi) "
      "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11)");
  impl_->delete_authors = Statement(db, "DELETE FROM Authors WHERE article_id = ?1");
  impl_->insert_author =
      Statement(db, "INSERT OR IGNORE INTO Authors (article_id, author_name) VALUES (?1, ?2)");
}

StoreWriter::StoreWriter(StoreWriter&&) noexcept = default;
StoreWriter& StoreWriter::operator=(StoreWriter&&) noexcept = default;
StoreWriter::~StoreWriter() = default;

std::uint64_t StoreWriter::records_added() const { return impl_->added; }

void StoreWriter::add(const ArticleRecord& raw) {
  if (raw.article_id.empty()) throw InvalidInput("article_id must be non-empty");
  const ArticleRecord record = normalize(raw);
  auto& s = *impl_;
  if (!s.in_txn) {
    detail::exec(s.db.get(), "BEGIN");
    s.in_txn = true;
  }

  s.insert_article.reset();
  s.insert_article.bind(1, record.article_id)
      .bind(2, record.title)
      .bind(3, text::to_lower(record.title))
      .bind(4, encode_list(record.authors))
      .bind(5, record.year)
      .bind(6, encode_list(record.in_citations))
      .bind(7, encode_list(record.out_citations))
      .bind(8, record.journal)
      .bind(9, record.volume)
      .bind(10, record.pages)
      .bind(11, record.doi);
  s.insert_article.step();

  s.delete_authors.reset();
  s.delete_authors.bind(1, record.article_id);
  s.delete_authors.step();

  for (const auto& author : record.authors) {
    s.insert_author.reset();
    s.insert_author.bind(1, record.article_id).bind(2, author);
    s.insert_author.step();
  }

  ++s.added;
  if (++s.pending >= kCommitEvery) {
    detail::exec(s.db.get(), "COMMIT");
    s.in_txn = false;
    s.pending = 0;
  }
}

CorpusStore StoreWriter::finish() {
  auto& s = *impl_;
  if (!s.db) throw StorageFailure("store writer already finished");
  if (s.in_txn) {
    detail::exec(s.db.get(), "COMMIT");
    s.in_txn = false;
  }
  detail::exec(s.db.get(),
               "CREATE INDEX idx_authors_name ON Authors (author_name, article_id);"
               "UPDATE meta SET value = '1' WHERE key = 'complete';");
  s.insert_article = {};
  s.delete_authors = {};
  s.insert_author = {};
  if (sqlite3_close_v2(s.db.release()) != SQLITE_OK) {
    throw StorageFailure("failed to close corpus store " + s.path.string());
  }
  return CorpusStore::open(s.path);
}

CorpusStore build_store(std::span<const ArticleRecord> records,
                        const std::filesystem::path& path) {
  StoreWriter writer(path);
  for (const auto& r : records) writer.add(r);
  return writer.finish();
}

// ---------------------------------------------------------------------------
// Dump ingestion

namespace {

struct GzCloser {
  void operator()(gzFile_s* f) const { gzclose(f); }
};

/// Line reader over plain or gzip-compressed files (zlib reads plain files
/// transparently).
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) : path_(path) {
    file_.reset(gzopen(path.c_str(), "rb"));
    if (!file_) throw StorageFailure("cannot open dump file " + path.string());
    gzbuffer(file_.get(), 1 << 20);
  }

  bool next(std::string& line) {
    line.clear();
    char buf[1 << 16];
    while (true) {
      if (gzgets(file_.get(), buf, sizeof buf) == nullptr) {
        int err = 0;
        const char* msg = gzerror(file_.get(), &err);
        if (err != Z_OK && err != Z_STREAM_END) {
          throw StorageFailure("read error in " + path_.string() + ": " + msg);
        }
        return !line.empty();
      }
      line.append(buf);
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
    }
  }

 private:
  std::filesystem::path path_;
  std::unique_ptr<gzFile_s, GzCloser> file_;
};

struct ParsedLine {
  std::optional<ArticleRecord> record;
  bool blank = false;
};

void parse_range(const std::vector<std::string>& lines, std::vector<ParsedLine>& out,
                 std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end; ++i) {
    if (text::trim(lines[i]).empty()) {
      out[i].blank = true;
      continue;
    }
    try {
      out[i].record = parse_record(lines[i]);
    } catch (const MalformedLine&) {
      out[i].record.reset();
    }
  }
}

}  // namespace

IngestReport ingest_dumps(std::span<const std::filesystem::path> dump_files,
                          const std::filesystem::path& store_path, const IngestOptions& options) {
  const unsigned workers = std::max(1u, options.workers);
  const std::size_t batch = std::max<std::size_t>(1, options.batch_lines);
  IngestReport report;
  StoreWriter writer(store_path);

  std::vector<std::string> lines;
  std::vector<ParsedLine> parsed;
  for (const auto& file : dump_files) {
    LineReader reader(file);
    std::uint64_t line_no = 0;
    bool more = true;
    while (more) {
      lines.clear();
      std::string line;
      while (lines.size() < batch && (more = reader.next(line))) lines.push_back(std::move(line));
      if (lines.empty()) break;

      parsed.assign(lines.size(), ParsedLine{});
      if (workers == 1 || lines.size() < 2 * workers) {
        parse_range(lines, parsed, 0, lines.size());
      } else {
        std::vector<std::jthread> pool;
        const std::size_t per = (lines.size() + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
          const std::size_t b = w * per;
          const std::size_t e = std::min(lines.size(), b + per);
          if (b >= e) break;
          pool.emplace_back([&, b, e] { parse_range(lines, parsed, b, e); });
        }
      }

      for (std::size_t i = 0; i < parsed.size(); ++i) {
        ++line_no;
        if (parsed[i].blank) continue;
        ++report.lines;
        if (!parsed[i].record) {
          if (++report.malformed <= 20) {
            spdlog::warn("{}:{}: skipping malformed line", file.string(), line_no);
          }
          continue;
        }
        writer.add(*parsed[i].record);
        ++report.records;
      }
    }
  }
  writer.finish();
  return report;
}

}  // namespace schubert::corpus
