#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace schubert {

/// Base for every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A dump line that is not a JSON object or lacks a usable `id`.
class MalformedLine : public Error {
 public:
  using Error::Error;
};

class StorageFailure : public Error {
 public:
  using Error::Error;
};

class ParseFailure : public Error {
 public:
  using Error::Error;
};

class MissingYear : public Error {
 public:
  using Error::Error;
};

/// Binary container error; `offset()` is the byte position where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace schubert
