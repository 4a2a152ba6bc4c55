#pragma once

// Thin RAII wrappers over the sqlite3 C API, private to the library.

#include <sqlite3.h>

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "schubert/error.hpp"

namespace schubert::detail {

struct DbCloser {
  void operator()(sqlite3* db) const { sqlite3_close_v2(db); }
};
struct StmtFinalizer {
  void operator()(sqlite3_stmt* s) const { sqlite3_finalize(s); }
};

using DbHandle = std::unique_ptr<sqlite3, DbCloser>;

class Statement {
 public:
  Statement() = default;
  Statement(sqlite3* db, std::string_view sql) : db_(db) {
    sqlite3_stmt* raw = nullptr;
    if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &raw, nullptr) !=
        SQLITE_OK) {
      throw StorageFailure(std::string("sqlite prepare failed: ") + sqlite3_errmsg(db));
    }
    stmt_.reset(raw);
  }

  Statement& bind(int idx, std::string_view text) {
    check(sqlite3_bind_text(stmt_.get(), idx, text.data(), static_cast<int>(text.size()),
                            SQLITE_TRANSIENT));
    return *this;
  }
  Statement& bind(int idx, const std::string& text) { return bind(idx, std::string_view(text)); }
  Statement& bind(int idx, const char* text) { return bind(idx, std::string_view(text)); }
  Statement& bind(int idx, const std::optional<std::string>& text) {
    if (text) return bind(idx, std::string_view(*text));
    check(sqlite3_bind_null(stmt_.get(), idx));
    return *this;
  }
  Statement& bind(int idx, std::optional<int> value) {
    if (value) {
      check(sqlite3_bind_int(stmt_.get(), idx, *value));
    } else {
      check(sqlite3_bind_null(stmt_.get(), idx));
    }
    return *this;
  }

  /// Returns true while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_.get());
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw StorageFailure(std::string("sqlite step failed: ") + sqlite3_errmsg(db_));
  }

  void reset() {
    sqlite3_reset(stmt_.get());
    sqlite3_clear_bindings(stmt_.get());
  }

  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_.get(), col);
    if (p == nullptr) return {};
    return std::string(reinterpret_cast<const char*>(p),
                       static_cast<std::size_t>(sqlite3_column_bytes(stmt_.get(), col)));
  }
  std::optional<std::string> optional_text(int col) const {
    if (is_null(col)) return std::nullopt;
    return text(col);
  }
  std::optional<int> optional_int(int col) const {
    if (is_null(col)) return std::nullopt;
    return sqlite3_column_int(stmt_.get(), col);
  }
  long long int64(int col) const { return sqlite3_column_int64(stmt_.get(), col); }
  bool is_null(int col) const { return sqlite3_column_type(stmt_.get(), col) == SQLITE_NULL; }

 private:
  void check(int rc) const {
    if (rc != SQLITE_OK) {
      throw StorageFailure(std::string("sqlite bind failed: ") + sqlite3_errmsg(db_));
    }
  }

  sqlite3* db_ = nullptr;
  std::unique_ptr<sqlite3_stmt, StmtFinalizer> stmt_;
};

inline void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw StorageFailure("sqlite error: " + msg + " [" + sql + "]");
  }
}

}  // namespace schubert::detail
