#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace angina {

struct SectionSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  std::string header;   // header as written in the note

  bool operator==(const SectionSpan&) const = default;
};

struct SegmenterConfig {
  std::vector<std::string> header_lexicon{"HPI", "History of Present Illness", "Subjective"};
  std::vector<std::string> terminator_lexicon{"Medications", "Objective", "Review of Systems",
                                              "Assessment",  "Plan",      "PMH"};

  // Non-empty lexicons, entries unique after case folding.
  void validate() const;
};

struct HpiSection {
  SectionSpan span;
  std::string text;
};

// Finds the first line-anchored header (case-insensitive, optional ':'),
// and returns the text from just after it up to the line before the next
// line-anchored terminator or header, or to the end of the note.
std::optional<HpiSection> extract_hpi(std::string_view note_text,
                                      const SegmenterConfig& config = {});

// Falls back to the whole text when no header is present.
std::string hpi_or_whole(std::string_view note_text, const SegmenterConfig& config = {});

// One entry per line; blank lines and '#' comments are skipped.
std::vector<std::string> load_lexicon_list(const std::filesystem::path& path);

}  // namespace angina
