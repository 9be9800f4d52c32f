#include "angina/symptom.hpp"

#include <algorithm>
#include <cctype>

namespace angina {
namespace {

constexpr std::array<std::string_view, kNumSymptoms> kNames = {
    "ChestPain",    "SubsternalCP",      "ExertionalCP",
    "RestReliefCP", "ShortnessOfBreath", "DyspneaOnExertion"};

constexpr std::array<std::string_view, kNumSymptoms> kAbbrevs = {"CP",   "SSCP", "EXCP",
                                                                 "RECP", "SOB",  "DOE"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view symptom_name(SymptomKind s) { return kNames[index_of(s)]; }
std::string_view symptom_abbrev(SymptomKind s) { return kAbbrevs[index_of(s)]; }

std::optional<SymptomKind> parse_symptom(std::string_view name) {
  for (SymptomKind s : kAllSymptoms) {
    if (iequals(name, symptom_name(s)) || iequals(name, symptom_abbrev(s))) return s;
  }
  return std::nullopt;
}

std::string_view label_name(Label3 l) {
  switch (l) {
    case Label3::Absent: return "absent";
    case Label3::Positive: return "positive";
    case Label3::Negative: return "negative";
  }
  return "absent";
}

std::optional<Label3> parse_label(std::string_view name) {
  if (iequals(name, "absent")) return Label3::Absent;
  if (iequals(name, "positive") || name == "+") return Label3::Positive;
  if (iequals(name, "negative") || name == "-") return Label3::Negative;
  return std::nullopt;
}

}  // namespace angina
