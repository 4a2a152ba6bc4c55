#pragma once

// Little-endian primitive encoding shared by the SCHB and SCHP formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "schubert/error.hpp"

namespace schubert::detail {

class LittleEndianWriter {
 public:
  explicit LittleEndianWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

 private:
  void put(std::uint64_t v, int width) {
    unsigned char buf[8];
    for (int i = 0; i < width; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, static_cast<std::size_t>(width));
  }

  std::ostream& out_;
};

/// Tracks the byte offset so decode errors can say where they happened.
class LittleEndianReader {
 public:
  LittleEndianReader(std::istream& in, std::uint64_t size) : in_(in), size_(size) {}

  std::uint64_t offset() const { return offset_; }
  std::uint64_t size() const { return size_; }

  /// Fails with a positioned error unless `n` more bytes are available.
  void require(std::uint64_t n, const char* what) const {
    if (size_ - offset_ < n) {
      throw FormatError(std::string("truncated file: expected ") + std::to_string(n) +
                            " bytes of " + what + ", " + std::to_string(size_ - offset_) +
                            " remain",
                        offset_);
    }
  }

  void bytes(void* data, std::size_t n, const char* what) {
    require(n, what);
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw FormatError(std::string("read failed in ") + what, offset_);
    }
    offset_ += n;
  }
  std::uint8_t u8(const char* what) {
    std::uint8_t v = 0;
    bytes(&v, 1, what);
    return v;
  }
  std::uint16_t u16(const char* what) { return static_cast<std::uint16_t>(get(2, what)); }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(get(4, what)); }
  std::uint64_t u64(const char* what) { return get(8, what); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

 private:
  std::uint64_t get(int width, const char* what) {
    unsigned char buf[8];
    bytes(buf, static_cast<std::size_t>(width), what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }

  std::istream& in_;
  std::uint64_t size_;
  std::uint64_t offset_ = 0;
};

}  // namespace schubert::detail
