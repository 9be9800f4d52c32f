#include "angina/segmenter.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "angina/error.hpp"
#include "angina/text_scan.hpp"

namespace angina {
namespace {

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r'; }

// Length of the longest entry matching at `pos` as a whole word, 0 if none.
std::size_t match_entry(std::string_view text, std::size_t pos,
                        const std::vector<std::string>& lowered_entries) {
  std::size_t best = 0;
  for (const auto& entry : lowered_entries) {
    if (entry.size() <= best || pos + entry.size() > text.size()) continue;
    if (rules::ascii_lower(text.substr(pos, entry.size())) != entry) continue;
    const std::size_t after = pos + entry.size();
    if (after == text.size() || text[after] == ':' || text[after] == '\n' || is_blank(text[after]))
      best = entry.size();
  }
  return best;
}

std::vector<std::string> lowered(const std::vector<std::string>& entries) {
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(rules::ascii_lower(e));
  return out;
}

}  // namespace

void SegmenterConfig::validate() const {
  auto check = [](const std::vector<std::string>& entries, const char* what) {
    if (entries.empty()) throw ConfigError(std::string(what) + " lexicon is empty");
    std::set<std::string> seen;
    for (const auto& e : entries) {
      if (e.empty()) throw ConfigError(std::string(what) + " lexicon has an empty entry");
      if (!seen.insert(rules::ascii_lower(e)).second)
        throw ConfigError(std::string(what) + " lexicon repeats '" + e + "'");
    }
  };
  check(header_lexicon, "header");
  check(terminator_lexicon, "terminator");
}

std::optional<HpiSection> extract_hpi(std::string_view text, const SegmenterConfig& config) {
  config.validate();
  const auto headers = lowered(config.header_lexicon);
  const auto terminators = lowered(config.terminator_lexicon);

  std::size_t line = 0;
  while (line <= text.size()) {
    const std::size_t newline = text.find('\n', line);
    const std::size_t line_end = newline == std::string_view::npos ? text.size() : newline;
    if (const std::size_t len = match_entry(text, line, headers)) {
      SectionSpan span;
      span.header = std::string(text.substr(line, len));
      std::size_t pos = line + len;
      if (pos < line_end && text[pos] == ':') ++pos;
      while (pos < line_end && is_blank(text[pos])) ++pos;
      if (pos == line_end) {
        if (newline == std::string_view::npos) return std::nullopt;
        pos = newline + 1;
      }
      span.start = pos;
      span.end = text.size();
      // Terminators and further headers count only at the start of a later line.
      for (std::size_t next = newline; next != std::string_view::npos;
           next = text.find('\n', next + 1)) {
        if (match_entry(text, next + 1, terminators) || match_entry(text, next + 1, headers)) {
          span.end = next;  // excludes the newline before the terminator line
          break;
        }
      }
      if (span.end <= span.start) return std::nullopt;
      std::string extracted(text.substr(span.start, span.end - span.start));
      return HpiSection{std::move(span), std::move(extracted)};
    }
    if (newline == std::string_view::npos) break;
    line = newline + 1;
  }
  return std::nullopt;
}

std::string hpi_or_whole(std::string_view note_text, const SegmenterConfig& config) {
  if (auto section = extract_hpi(note_text, config)) return std::move(section->text);
  return std::string(note_text);
}

std::vector<std::string> load_lexicon_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lexicon list " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && is_blank(line.back())) line.pop_back();
    std::size_t first = 0;
    while (first < line.size() && is_blank(line[first])) ++first;
    line.erase(0, first);
    if (line.empty() || line[0] == '#') continue;
    entries.push_back(line);
  }
  return entries;
}

}  // namespace angina
