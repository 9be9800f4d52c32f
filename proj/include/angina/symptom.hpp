#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace angina {

// Canonical order is used for every matrix, report row and file layout.
enum class SymptomKind : std::size_t {
  ChestPain = 0,
  SubsternalCP,
  ExertionalCP,
  RestReliefCP,
  ShortnessOfBreath,
  DyspneaOnExertion,
};

inline constexpr std::size_t kNumSymptoms = 6;

inline constexpr std::array<SymptomKind, kNumSymptoms> kAllSymptoms = {
    SymptomKind::ChestPain,         SymptomKind::SubsternalCP,
    SymptomKind::ExertionalCP,      SymptomKind::RestReliefCP,
    SymptomKind::ShortnessOfBreath, SymptomKind::DyspneaOnExertion,
};

// Order matches the Absent / + / - layout of the confusion tables.
enum class Label3 : std::size_t { Absent = 0, Positive = 1, Negative = 2 };

inline constexpr std::size_t kNumLabels = 3;

inline constexpr std::array<Label3, kNumLabels> kAllLabels = {
    Label3::Absent, Label3::Positive, Label3::Negative};

constexpr std::size_t index_of(SymptomKind s) { return static_cast<std::size_t>(s); }
constexpr std::size_t index_of(Label3 l) { return static_cast<std::size_t>(l); }

std::string_view symptom_name(SymptomKind s);
// Short report label ("CP", "SSCP", "EXCP", "RECP", "SOB", "DOE").
std::string_view symptom_abbrev(SymptomKind s);
// Accepts canonical names and abbreviations, case-insensitively.
std::optional<SymptomKind> parse_symptom(std::string_view name);

std::string_view label_name(Label3 l);
// Case-insensitive; accepts "absent", "positive", "negative", "+", "-".
std::optional<Label3> parse_label(std::string_view name);

// Total map SymptomKind -> Label3.
class SymptomLabels {
 public:
  SymptomLabels() { values_.fill(Label3::Absent); }

  Label3& operator[](SymptomKind s) { return values_[index_of(s)]; }
  Label3 operator[](SymptomKind s) const { return values_[index_of(s)]; }

  bool operator==(const SymptomLabels&) const = default;

 private:
  std::array<Label3, kNumSymptoms> values_;
};

}  // namespace angina
