#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "angina/symptom.hpp"

namespace angina::rules {

enum class CueKind {
  Direct,     // asserts the symptom on its own
  Negative,   // explicit negative mention
  Qualifier,  // provocation/palliation vocabulary
};

// Cue inventory for one symptom. Phrases are lowercase.
struct SymptomCues {
  std::vector<std::string> positive_cues;
  std::vector<std::string> negative_cues;
  std::vector<std::string> qualifier_cues;
  std::vector<std::string> anti_cues;
  // When set, qualifier and negative cues only count inside a sentence that
  // also holds a cue of the anchor symptom.
  std::optional<SymptomKind> anchor;
  // When set, a qualifier followed or preceded by a duration longer than
  // this many minutes is suppressed.
  std::optional<int> max_duration_minutes;
};

// Per-symptom cues plus the shared negation vocabulary.
class CueLexicon {
 public:
  struct Entry {
    SymptomKind symptom;
    CueKind kind;
    std::string phrase;
    std::vector<std::string> tokens;
  };

  // Throws ConfigError when an invariant does not hold.
  CueLexicon(std::array<SymptomCues, kNumSymptoms> cues,
             std::vector<std::string> negation_triggers,
             std::vector<std::string> scope_terminators);

  // Sectioned text format, see data/lexicon.txt. Phrases may contain
  // alternation groups "{a|b|}" that expand to every combination.
  static CueLexicon parse(std::string_view text);
  static CueLexicon load(const std::filesystem::path& path);
  // The shipped lexicon (data/lexicon.txt compiled in).
  static const CueLexicon& builtin();

  const SymptomCues& cues(SymptomKind s) const { return cues_[index_of(s)]; }
  const std::vector<std::string>& negation_triggers() const { return negation_triggers_; }
  const std::vector<std::string>& scope_terminators() const { return scope_terminators_; }

  // Indices of cue and anti-cue entries keyed by their first token.
  const std::vector<std::size_t>& cues_starting_with(const std::string& token) const;
  const std::vector<std::size_t>& anti_cues_starting_with(const std::string& token) const;
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  const Entry& anti_entry(std::size_t i) const { return anti_entries_[i]; }
  const std::vector<std::vector<std::string>>& negation_tokens() const { return negation_tokens_; }
  const std::vector<std::vector<std::string>>& terminator_tokens() const { return terminator_tokens_; }

 private:
  void compile();

  std::array<SymptomCues, kNumSymptoms> cues_;
  std::vector<std::string> negation_triggers_;
  std::vector<std::string> scope_terminators_;

  std::vector<Entry> entries_;
  std::vector<Entry> anti_entries_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_first_token_;
  std::unordered_map<std::string, std::vector<std::size_t>> anti_by_first_token_;
  std::vector<std::vector<std::string>> negation_tokens_;
  std::vector<std::vector<std::string>> terminator_tokens_;
};

// "{a|b} c" -> {"a c", "b c"}; groups may be empty alternatives.
std::vector<std::string> expand_alternations(std::string_view pattern);

}  // namespace angina::rules
