#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace schubert::harvest {

struct VenueLink {
  std::string url;
  std::string venue;
  int year = 0;

  bool operator==(const VenueLink&) const = default;
};

struct PaperLink {
  std::string pdf_url;
  std::optional<std::string> bib_url;
  std::string venue;
  int year = 0;

  bool operator==(const PaperLink&) const = default;
};

struct VenueLinks {
  std::vector<VenueLink> links;
  std::uint64_t unparsed_year = 0;  ///< event links whose slug carried no year
};

struct PaperLinks {
  std::vector<PaperLink> links;
  std::uint64_t skipped = 0;  ///< qualifying lines without an extractable .pdf URL
};

/// Lines mentioning any of these (case-insensitive) are not papers.
inline constexpr std::string_view kExcludedMarkers[] = {"poster", "presentation",
                                                        "supplementary", "notes"};

/// Event listing links (`.../events/<venue>-<year>/`) from a saved anthology
/// index page, in document order, without duplicates. Throws ParseFailure if
/// the input contains no markup at all.
VenueLinks extract_venue_links(std::string_view index_html);

/// One PaperLink per line that mentions "pdf" and none of the excluded
/// markers. The bib URL comes from the same line when present.
PaperLinks extract_paper_links(std::string_view venue_html, std::string_view venue, int year);

/// All href attribute values in `fragment`, in order. Handles double-quoted,
/// single-quoted and unquoted values.
std::vector<std::string> extract_hrefs(std::string_view fragment);

/// Writes the JSON-lines link manifest.
void write_manifest(std::ostream& out, const std::vector<PaperLink>& links);

/// Last non-empty path segment of a URL, ignoring query and fragment.
std::string last_path_segment(std::string_view url);

}  // namespace schubert::harvest
