#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "angina/lexicon.hpp"
#include "angina/symptom.hpp"

namespace angina::rules {

enum class Polarity { Positive, Negative };

struct CueMatch {
  SymptomKind symptom;
  Polarity polarity;
  std::size_t begin = 0;  // byte span in the lowercased text
  std::size_t end = 0;
  std::string cue;
  CueKind kind = CueKind::Direct;

  bool operator==(const CueMatch&) const = default;
};

struct RuleConfig {
  std::size_t negation_window = 6;  // tokens looked back from a cue
  std::string sentence_delimiters = ".;\n!?";
  std::size_t duration_window = 4;  // tokens around a palliation cue

  void validate() const;
};

// Longest-phrase-first matching per symptom, anti-cue suppression and
// anchoring. Matches come back in text order.
std::vector<CueMatch> detect_cues(std::string_view text, const CueLexicon& lexicon,
                                  const RuleConfig& config = {});

// Flips a positive match to negative when a negation trigger ends at most
// `negation_window` tokens before it in the same sentence, with no scope
// terminator in between.
std::vector<CueMatch> apply_negation(std::vector<CueMatch> matches, std::string_view text,
                                     const RuleConfig& config, const CueLexicon& lexicon);

// Promotes parents of positive characterizations; never demotes.
SymptomLabels enforce_dependencies(SymptomLabels labels);

// Positive beats negative beats absent per symptom, then dependencies.
SymptomLabels label_note(std::string_view text, const CueLexicon& lexicon,
                         const RuleConfig& config = {});

}  // namespace angina::rules
