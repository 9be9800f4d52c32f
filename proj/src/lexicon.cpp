#include "angina/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "angina/error.hpp"
#include "angina/text_scan.hpp"

namespace angina::rules {

extern const std::string_view kBuiltinLexiconText;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

void validate_phrases(const std::vector<std::string>& phrases, const std::string& where) {
  for (const auto& p : phrases) {
    if (phrase_tokens(p).empty()) throw ConfigError(where + ": empty cue phrase");
    if (ascii_lower(p) != p) throw ConfigError(where + ": cue '" + p + "' is not lowercase");
  }
}

const std::vector<std::size_t> kNoEntries;

}  // namespace

std::vector<std::string> expand_alternations(std::string_view pattern) {
  const auto open = pattern.find('{');
  if (open == std::string_view::npos) return {collapse_spaces(pattern)};
  const auto close = pattern.find('}', open);
  if (close == std::string_view::npos)
    throw ConfigError("unbalanced '{' in cue pattern '" + std::string(pattern) + "'");
  const std::string_view prefix = pattern.substr(0, open);
  const std::string_view body = pattern.substr(open + 1, close - open - 1);
  const std::vector<std::string> tails = expand_alternations(pattern.substr(close + 1));

  std::vector<std::string> options;
  std::size_t start = 0;
  while (true) {
    const auto bar = body.find('|', start);
    options.emplace_back(body.substr(start, bar == std::string_view::npos ? bar : bar - start));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  std::vector<std::string> out;
  for (const auto& option : options) {
    for (const auto& tail : tails) {
      out.push_back(collapse_spaces(std::string(prefix) + option + " " + tail));
    }
  }
  return out;
}

CueLexicon::CueLexicon(std::array<SymptomCues, kNumSymptoms> cues,
                       std::vector<std::string> negation_triggers,
                       std::vector<std::string> scope_terminators)
    : cues_(std::move(cues)),
      negation_triggers_(std::move(negation_triggers)),
      scope_terminators_(std::move(scope_terminators)) {
  for (SymptomKind s : kAllSymptoms) {
    const auto& c = cues_[index_of(s)];
    const std::string where(symptom_name(s));
    if (c.positive_cues.empty() && c.qualifier_cues.empty())
      throw ConfigError(where + ": needs at least one positive or qualifier cue");
    validate_phrases(c.positive_cues, where);
    validate_phrases(c.negative_cues, where);
    validate_phrases(c.qualifier_cues, where);
    validate_phrases(c.anti_cues, where);
    if (!c.qualifier_cues.empty() && !c.anchor)
      throw ConfigError(where + ": qualifier cues need an anchor symptom");
    if (c.anchor) {
      if (*c.anchor == s) throw ConfigError(where + ": a symptom cannot anchor itself");
      if (cues_[index_of(*c.anchor)].anchor)
        throw ConfigError(where + ": anchor symptom must not be anchored itself");
    }
    if (c.max_duration_minutes && *c.max_duration_minutes <= 0)
      throw ConfigError(where + ": max_duration must be positive");
  }
  validate_phrases(negation_triggers_, "negation");
  validate_phrases(scope_terminators_, "terminators");
  compile();
}

void CueLexicon::compile() {
  for (SymptomKind s : kAllSymptoms) {
    const auto& c = cues_[index_of(s)];
    auto add = [&](std::vector<Entry>& into, const std::vector<std::string>& phrases, CueKind kind) {
      for (const auto& p : phrases) into.push_back({s, kind, p, phrase_tokens(p)});
    };
    add(entries_, c.positive_cues, CueKind::Direct);
    add(entries_, c.negative_cues, CueKind::Negative);
    add(entries_, c.qualifier_cues, CueKind::Qualifier);
    add(anti_entries_, c.anti_cues, CueKind::Direct);
  }
  for (std::size_t i = 0; i < entries_.size(); ++i)
    by_first_token_[entries_[i].tokens.front()].push_back(i);
  for (std::size_t i = 0; i < anti_entries_.size(); ++i)
    anti_by_first_token_[anti_entries_[i].tokens.front()].push_back(i);
  for (const auto& p : negation_triggers_) negation_tokens_.push_back(phrase_tokens(p));
  for (const auto& p : scope_terminators_) terminator_tokens_.push_back(phrase_tokens(p));
}

const std::vector<std::size_t>& CueLexicon::cues_starting_with(
    const std::string& token) const {
  auto it = by_first_token_.find(token);
  return it == by_first_token_.end() ? kNoEntries : it->second;
}

const std::vector<std::size_t>& CueLexicon::anti_cues_starting_with(
    const std::string& token) const {
  auto it = anti_by_first_token_.find(token);
  return it == anti_by_first_token_.end() ? kNoEntries : it->second;
}

CueLexicon CueLexicon::parse(std::string_view text) {
  std::array<SymptomCues, kNumSymptoms> cues;
  std::vector<std::string> negation, terminators;
  enum class Section { None, Negation, Terminators, Symptom } section = Section::None;
  SymptomKind current = SymptomKind::ChestPain;
  std::set<std::string> seen_sections;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_number = 0;
  auto fail = [&](const std::string& what) {
    throw ConfigError("lexicon line " + std::to_string(line_number) + ": " + what);
  };
  auto add_unique = [](std::vector<std::string>& into, std::vector<std::string> phrases) {
    for (auto& p : phrases) {
      if (std::find(into.begin(), into.end(), p) == into.end()) into.push_back(std::move(p));
    }
  };

  while (std::getline(in, raw)) {
    ++line_number;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!seen_sections.insert(ascii_lower(name)).second) fail("duplicate section " + name);
      if (ascii_lower(name) == "negation") {
        section = Section::Negation;
      } else if (ascii_lower(name) == "terminators") {
        section = Section::Terminators;
      } else if (auto s = parse_symptom(name)) {
        section = Section::Symptom;
        current = *s;
      } else {
        fail("unknown section " + name);
      }
      continue;
    }
    switch (section) {
      case Section::None: fail("entry outside of a section"); continue;
      case Section::Negation: add_unique(negation, expand_alternations(line)); continue;
      case Section::Terminators: add_unique(terminators, expand_alternations(line)); continue;
      case Section::Symptom: break;
    }

    std::string tag, rest;
    if (line.rfind("\xE2\x88\x92", 0) == 0) {  // U+2212 minus sign
      tag = "-";
      rest = trim(std::string_view(line).substr(3));
    } else {
      const auto space = line.find_first_of(" \t");
      if (space == std::string::npos) fail("expected '<tag> <phrase>'");
      tag = line.substr(0, space);
      rest = trim(std::string_view(line).substr(space + 1));
    }
    if (rest.empty()) fail("empty phrase");
    auto& c = cues[index_of(current)];
    if (tag == "+") {
      add_unique(c.positive_cues, expand_alternations(rest));
    } else if (tag == "-") {
      add_unique(c.negative_cues, expand_alternations(rest));
    } else if (tag == "qualifier") {
      add_unique(c.qualifier_cues, expand_alternations(rest));
    } else if (tag == "anti") {
      add_unique(c.anti_cues, expand_alternations(rest));
    } else if (tag == "anchor") {
      auto s = parse_symptom(rest);
      if (!s) fail("unknown anchor symptom " + rest);
      c.anchor = *s;
    } else if (tag == "max_duration") {
      try {
        c.max_duration_minutes = std::stoi(rest);
      } catch (const std::exception&) {
        fail("max_duration needs an integer");
      }
    } else {
      fail("unknown tag '" + tag + "'");
    }
  }
  return CueLexicon(std::move(cues), std::move(negation), std::move(terminators));
}

CueLexicon CueLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lexicon file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const CueLexicon& CueLexicon::builtin() {
  static const CueLexicon lexicon = parse(kBuiltinLexiconText);
  return lexicon;
}

}  // namespace angina::rules
