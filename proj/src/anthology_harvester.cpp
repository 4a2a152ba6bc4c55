#include "schubert/anthology_harvester.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <unordered_set>

#include <json.hpp>

#include "schubert/error.hpp"
#include "schubert/text_util.hpp"

namespace schubert::harvest {

namespace {

bool looks_like_markup(std::string_view doc) {
  for (std::size_t i = 0; i + 1 < doc.size(); ++i) {
    if (doc[i] != '<') continue;
    const auto next = static_cast<unsigned char>(doc[i + 1]);
    if (std::isalpha(next) || next == '!' || next == '/') return true;
  }
  return false;
}

std::string strip_query(std::string_view url) {
  const auto cut = url.find_first_of("?#");
  return std::string(url.substr(0, cut));
}

bool ends_with_icase(std::string_view s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  return text::contains_icase(s.substr(s.size() - suffix.size()), suffix);
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<std::string> extract_hrefs(std::string_view fragment) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < fragment.size()) {
    std::size_t hit = std::string_view::npos;
    for (std::size_t i = pos; i + 4 < fragment.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(fragment[i])) == 'h' &&
          text::contains_icase(fragment.substr(i, 4), "href")) {
        const auto prev = i == 0 ? ' ' : static_cast<unsigned char>(fragment[i - 1]);
        const bool word_start = !std::isalnum(prev) && prev != '-' && prev != '_' && prev != ':';
        if (word_start) {
          hit = i;
          break;
        }
      }
    }
    if (hit == std::string_view::npos) break;

    std::size_t i = hit + 4;
    while (i < fragment.size() && std::isspace(static_cast<unsigned char>(fragment[i]))) ++i;
    if (i >= fragment.size() || fragment[i] != '=') {
      pos = hit + 4;
      continue;
    }
    ++i;
    while (i < fragment.size() && std::isspace(static_cast<unsigned char>(fragment[i]))) ++i;
    if (i >= fragment.size()) break;

    std::size_t end = 0;
    if (fragment[i] == '"' || fragment[i] == '\'') {
      const char quote = fragment[i++];
      end = fragment.find(quote, i);
      if (end == std::string_view::npos) break;
    } else {
      end = i;
      while (end < fragment.size() && !std::isspace(static_cast<unsigned char>(fragment[end])) &&
             fragment[end] != '>') {
        ++end;
      }
    }
    if (end > i) out.emplace_back(fragment.substr(i, end - i));
    pos = end + 1;
  }
  return out;
}

std::string last_path_segment(std::string_view url) {
  std::string path = strip_query(url);
  while (!path.empty() && path.back() == '/') path.pop_back();
  const auto slash = path.rfind('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

VenueLinks extract_venue_links(std::string_view index_html) {
  if (!looks_like_markup(index_html)) {
    throw ParseFailure("input does not look like an HTML document");
  }
  VenueLinks out;
  std::unordered_set<std::string> seen;
  for (const auto& href : extract_hrefs(index_html)) {
    const std::string path = strip_query(href);
    if (path.find("/events/") == std::string::npos && path.rfind("events/", 0) != 0) continue;

    const std::string slug = last_path_segment(path);
    if (slug.empty() || slug == "events") continue;
    const auto dash = slug.rfind('-');
    int year = 0;
    bool parsed = false;
    if (dash != std::string::npos && dash > 0 && slug.size() - dash - 1 == 4) {
      const char* first = slug.data() + dash + 1;
      const char* last = slug.data() + slug.size();
      const auto [ptr, ec] = std::from_chars(first, last, year);
      parsed = ec == std::errc{} && ptr == last;
    }
    if (!parsed) {
      ++out.unparsed_year;
      continue;
    }
    if (!seen.insert(href).second) continue;
    out.links.push_back(VenueLink{href, upper(slug.substr(0, dash)), year});
  }
  return out;
}

PaperLinks extract_paper_links(std::string_view venue_html, std::string_view venue, int year) {
  PaperLinks out;
  std::size_t start = 0;
  while (start <= venue_html.size()) {
    auto end = venue_html.find('\n', start);
    if (end == std::string_view::npos) end = venue_html.size();
    const auto line = venue_html.substr(start, end - start);
    start = end + 1;

    if (!text::contains_icase(line, "pdf")) continue;
    const bool excluded = std::any_of(std::begin(kExcludedMarkers), std::end(kExcludedMarkers),
                                      [&](std::string_view m) { return text::contains_icase(line, m); });
    if (excluded) continue;

    std::optional<std::string> pdf;
    std::optional<std::string> bib;
    for (auto& href : extract_hrefs(line)) {
      const auto path = strip_query(href);
      if (!pdf && ends_with_icase(path, ".pdf")) pdf = href;
      else if (!bib && ends_with_icase(path, ".bib")) bib = href;
    }
    if (!pdf) {
      ++out.skipped;
      continue;
    }
    out.links.push_back(PaperLink{*pdf, bib, std::string(venue), year});
  }
  return out;
}

void write_manifest(std::ostream& out, const std::vector<PaperLink>& links) {
  for (const auto& link : links) {
    nlohmann::ordered_json rec;
    rec["venue"] = link.venue;
    rec["year"] = link.year;
    rec["pdf_url"] = link.pdf_url;
    if (link.bib_url) {
      rec["bib_url"] = *link.bib_url;
    } else {
      rec["bib_url"] = nullptr;
    }
    out << rec.dump() << '\n';
  }
}

}  // namespace schubert::harvest
