#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace schubert::text {

/// Lowercases ASCII plus the Latin-1, Latin Extended-A, Greek and Cyrillic
/// letter ranges. Invalid UTF-8 bytes pass through unchanged.
std::string to_lower(std::string_view s);

/// Decodes one code point starting at `pos`, advancing `pos`. Invalid
/// sequences decode as the single lead byte.
char32_t decode_utf8(std::string_view s, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

bool is_unicode_space(char32_t cp);

/// ASCII case-insensitive substring search.
bool contains_icase(std::string_view haystack, std::string_view needle);

std::string_view trim(std::string_view s);

/// FNV-1a 64-bit over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

std::uint64_t splitmix64(std::uint64_t x);

/// Maps 64 random bits to a double in [0, 1) using the top 53 bits.
inline double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace schubert::text
