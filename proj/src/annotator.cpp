#include "angina/annotator.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

#include "angina/error.hpp"
#include "angina/text_scan.hpp"

namespace angina::rules {
namespace {

struct Candidate {
  SymptomKind symptom;
  CueKind kind;
  std::size_t first;  // token range [first, last)
  std::size_t last;
  std::size_t entry;

  std::size_t length() const { return last - first; }
  bool overlaps(std::size_t a, std::size_t b) const { return first < b && a < last; }
};

bool matches_at(const std::vector<Token>& tokens, std::size_t at, std::size_t sentence_end,
                const std::vector<std::string>& phrase) {
  if (at + phrase.size() > sentence_end) return false;
  for (std::size_t k = 0; k < phrase.size(); ++k) {
    if (tokens[at + k].text != phrase[k]) return false;
  }
  return true;
}

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::optional<double> number_word(std::string_view w) {
  static constexpr std::array<std::pair<std::string_view, double>, 16> kWords = {{
      {"a", 1},      {"an", 1},   {"one", 1},     {"two", 2},   {"three", 3}, {"four", 4},
      {"five", 5},   {"six", 6},  {"seven", 7},   {"eight", 8}, {"nine", 9},  {"ten", 10},
      {"twelve", 12}, {"few", 2}, {"several", 3}, {"many", 4},
  }};
  for (const auto& [word, value] : kWords) {
    if (w == word) return value;
  }
  if (all_digits(w) && w.size() < 9) return std::stod(std::string(w));
  return std::nullopt;
}

// Minutes per unit, or nullopt when `w` is not a time unit.
std::optional<double> unit_minutes(std::string_view w) {
  if (w == "h" || w == "hr" || w == "hrs" || w == "hour" || w == "hours") return 60.0;
  if (w == "m" || w == "min" || w == "mins" || w == "minute" || w == "minutes") return 1.0;
  return std::nullopt;
}

bool is_plural_unit(std::string_view w) {
  return w == "hours" || w == "hrs" || w == "minutes" || w == "mins";
}

// Duration expressed by the phrase ending at token `j`, in minutes. A
// comparative ("over", "more than", "longer than", ">") makes the bound
// strict, which is reported as one extra minute.
std::optional<double> duration_ending_at(const ScannedText& text, std::size_t sentence_first,
                                         std::size_t j) {
  const auto& tokens = text.tokens;
  const std::string& w = tokens[j].text;
  std::optional<double> minutes;
  std::size_t number_token = j;

  // Glued forms such as "2hr" or "90min".
  std::size_t split = 0;
  while (split < w.size() && std::isdigit(static_cast<unsigned char>(w[split]))) ++split;
  if (split > 0 && split < w.size() && split < 9) {
    if (auto unit = unit_minutes(std::string_view(w).substr(split))) {
      minutes = std::stod(w.substr(0, split)) * *unit;
    }
  } else if (auto unit = unit_minutes(w)) {
    if (j > sentence_first) {
      if (auto n = number_word(tokens[j - 1].text)) {
        double value = *n;
        number_token = j - 1;
        // "1.5 hours" scans as "1", "5", "hours".
        if (j - 1 > sentence_first && all_digits(tokens[j - 1].text) &&
            all_digits(tokens[j - 2].text) && tokens[j - 2].end + 1 == tokens[j - 1].begin &&
            text.lowered[tokens[j - 2].end] == '.' && tokens[j - 2].text.size() < 9 &&
            tokens[j - 1].text.size() < 9) {
          value = std::stod(tokens[j - 2].text + "." + tokens[j - 1].text);
          number_token = j - 2;
        }
        minutes = value * *unit;
      }
    }
    if (!minutes && is_plural_unit(w)) minutes = 2.0 * *unit;
  }
  if (!minutes) return std::nullopt;

  bool strict = false;
  if (number_token > sentence_first) {
    const std::string& prev = tokens[number_token - 1].text;
    if (prev == "over") strict = true;
    if (prev == "than" && number_token - 1 > sentence_first) {
      const std::string& comp = tokens[number_token - 2].text;
      strict = comp == "more" || comp == "longer" || comp == "greater";
    }
  }
  // A '>' between the previous token (or sentence start) and the number.
  const std::size_t from =
      number_token > sentence_first ? tokens[number_token - 1].end : tokens[sentence_first].begin;
  if (tokens[number_token].begin > from) {
    const std::string_view gap(text.lowered.data() + from, tokens[number_token].begin - from);
    if (gap.find('>') != std::string_view::npos) strict = true;
  }
  return strict ? *minutes + 1.0 : *minutes;
}

bool long_duration_near(const ScannedText& text, const Sentence& sentence, const Candidate& c,
                        std::size_t window, int max_minutes) {
  const std::size_t lo =
      c.first >= sentence.first_token + window ? c.first - window : sentence.first_token;
  const std::size_t hi = std::min(sentence.last_token, c.last + window);
  for (std::size_t j = lo; j < hi; ++j) {
    if (j >= c.first && j < c.last) continue;
    if (auto minutes = duration_ending_at(text, sentence.first_token, j)) {
      if (*minutes > max_minutes) return true;
    }
  }
  return false;
}

std::size_t kind_rank(CueKind k) {
  switch (k) {
    case CueKind::Direct: return 0;
    case CueKind::Negative: return 1;
    case CueKind::Qualifier: return 2;
  }
  return 3;
}

std::size_t token_at(const ScannedText& text, std::size_t byte_begin) {
  auto it = std::lower_bound(text.tokens.begin(), text.tokens.end(), byte_begin,
                             [](const Token& t, std::size_t b) { return t.begin < b; });
  if (it == text.tokens.end() || it->begin != byte_begin)
    throw DataError("cue span does not start on a token of the given text");
  return static_cast<std::size_t>(it - text.tokens.begin());
}

}  // namespace

void RuleConfig::validate() const {
  if (negation_window < 1) throw ConfigError("negation_window must be >= 1");
}

std::vector<CueMatch> detect_cues(std::string_view text, const CueLexicon& lexicon,
                                  const RuleConfig& config) {
  config.validate();
  const ScannedText scanned = scan_text(text, config.sentence_delimiters);
  const auto& tokens = scanned.tokens;
  std::vector<CueMatch> out;

  for (const Sentence& sentence : scanned.sentences) {
    std::array<std::vector<Candidate>, kNumSymptoms> found;
    std::array<std::vector<std::pair<std::size_t, std::size_t>>, kNumSymptoms> anti;
    for (std::size_t i = sentence.first_token; i < sentence.last_token; ++i) {
      for (std::size_t e : lexicon.cues_starting_with(tokens[i].text)) {
        const auto& entry = lexicon.entry(e);
        if (matches_at(tokens, i, sentence.last_token, entry.tokens))
          found[index_of(entry.symptom)].push_back(
              {entry.symptom, entry.kind, i, i + entry.tokens.size(), e});
      }
      for (std::size_t e : lexicon.anti_cues_starting_with(tokens[i].text)) {
        const auto& entry = lexicon.anti_entry(e);
        if (matches_at(tokens, i, sentence.last_token, entry.tokens))
          anti[index_of(entry.symptom)].emplace_back(i, i + entry.tokens.size());
      }
    }

    std::array<std::vector<Candidate>, kNumSymptoms> kept;
    for (SymptomKind s : kAllSymptoms) {
      auto& cands = found[index_of(s)];
      std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.length() != b.length()) return a.length() > b.length();
        if (a.first != b.first) return a.first < b.first;
        return kind_rank(a.kind) < kind_rank(b.kind);
      });
      auto& accepted = kept[index_of(s)];
      for (const auto& c : cands) {
        const bool clash = std::any_of(accepted.begin(), accepted.end(), [&](const Candidate& a) {
          return a.overlaps(c.first, c.last);
        });
        if (!clash) accepted.push_back(c);
      }
      const auto& anti_ranges = anti[index_of(s)];
      std::erase_if(accepted, [&](const Candidate& c) {
        return std::any_of(anti_ranges.begin(), anti_ranges.end(),
                           [&](const auto& r) { return c.overlaps(r.first, r.second); });
      });
      if (const auto& limit = lexicon.cues(s).max_duration_minutes) {
        std::erase_if(accepted, [&](const Candidate& c) {
          return c.kind == CueKind::Qualifier &&
                 long_duration_near(scanned, sentence, c, config.duration_window, *limit);
        });
      }
    }
    // Anchors are never anchored themselves, so their matches are final here.
    for (SymptomKind s : kAllSymptoms) {
      const auto& anchor = lexicon.cues(s).anchor;
      if (anchor && kept[index_of(*anchor)].empty()) {
        std::erase_if(kept[index_of(s)],
                      [](const Candidate& c) { return c.kind != CueKind::Direct; });
      }
    }
    for (const auto& per_symptom : kept) {
      for (const auto& c : per_symptom) {
        out.push_back({c.symptom,
                       c.kind == CueKind::Negative ? Polarity::Negative : Polarity::Positive,
                       tokens[c.first].begin, tokens[c.last - 1].end,
                       lexicon.entry(c.entry).phrase, c.kind});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const CueMatch& a, const CueMatch& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    return index_of(a.symptom) < index_of(b.symptom);
  });
  return out;
}

std::vector<CueMatch> apply_negation(std::vector<CueMatch> matches, std::string_view text,
                                     const RuleConfig& config, const CueLexicon& lexicon) {
  config.validate();
  if (matches.empty()) return matches;
  const ScannedText scanned = scan_text(text, config.sentence_delimiters);
  const auto& tokens = scanned.tokens;

  // Trigger occurrences as [first, last) token ranges; terminator positions.
  std::vector<std::pair<std::size_t, std::size_t>> triggers;
  std::vector<std::size_t> terminators;
  for (const Sentence& sentence : scanned.sentences) {
    for (std::size_t i = sentence.first_token; i < sentence.last_token; ++i) {
      for (const auto& phrase : lexicon.negation_tokens()) {
        if (matches_at(tokens, i, sentence.last_token, phrase))
          triggers.emplace_back(i, i + phrase.size());
      }
      for (const auto& phrase : lexicon.terminator_tokens()) {
        if (matches_at(tokens, i, sentence.last_token, phrase)) terminators.push_back(i);
      }
    }
  }

  for (CueMatch& m : matches) {
    if (m.polarity != Polarity::Positive) continue;
    const std::size_t cue_first = token_at(scanned, m.begin);
    const std::size_t sentence = tokens[cue_first].sentence;
    for (const auto& [first, last] : triggers) {
      if (last > cue_first || tokens[first].sentence != sentence) continue;
      if (cue_first - (last - 1) > config.negation_window) continue;
      const bool terminated = std::any_of(terminators.begin(), terminators.end(),
                                          [&](std::size_t t) { return t >= last && t < cue_first; });
      if (terminated) continue;
      m.polarity = Polarity::Negative;
      break;
    }
  }
  return matches;
}

SymptomLabels enforce_dependencies(SymptomLabels labels) {
  auto promote_if = [&](SymptomKind child, SymptomKind parent) {
    if (labels[child] == Label3::Positive) labels[parent] = Label3::Positive;
  };
  promote_if(SymptomKind::SubsternalCP, SymptomKind::ChestPain);
  promote_if(SymptomKind::ExertionalCP, SymptomKind::ChestPain);
  promote_if(SymptomKind::RestReliefCP, SymptomKind::ChestPain);
  promote_if(SymptomKind::DyspneaOnExertion, SymptomKind::ShortnessOfBreath);
  return labels;
}

SymptomLabels label_note(std::string_view text, const CueLexicon& lexicon,
                         const RuleConfig& config) {
  std::vector<CueMatch> matches =
      apply_negation(detect_cues(text, lexicon, config), text, config, lexicon);

  // A qualifier attaches to its anchor: when every anchor cue in the
  // sentence is negated, so is the qualifier.
  if (!matches.empty()) {
    const ScannedText scanned = scan_text(text, config.sentence_delimiters);
    std::vector<std::size_t> sentence_of;
    sentence_of.reserve(matches.size());
    for (const auto& m : matches) sentence_of.push_back(scanned.tokens[token_at(scanned, m.begin)].sentence);
    for (std::size_t i = 0; i < matches.size(); ++i) {
      CueMatch& m = matches[i];
      const auto& anchor = lexicon.cues(m.symptom).anchor;
      if (!anchor || m.kind == CueKind::Direct || m.polarity != Polarity::Positive) continue;
      bool any_anchor = false, positive_anchor = false;
      for (std::size_t j = 0; j < matches.size(); ++j) {
        if (matches[j].symptom != *anchor || sentence_of[j] != sentence_of[i]) continue;
        any_anchor = true;
        positive_anchor = positive_anchor || matches[j].polarity == Polarity::Positive;
      }
      if (any_anchor && !positive_anchor) m.polarity = Polarity::Negative;
    }
  }

  SymptomLabels labels;
  for (const auto& m : matches) {
    Label3& l = labels[m.symptom];
    if (m.polarity == Polarity::Positive) {
      l = Label3::Positive;
    } else if (l == Label3::Absent) {
      l = Label3::Negative;
    }
  }
  return enforce_dependencies(labels);
}

}  // namespace angina::rules
