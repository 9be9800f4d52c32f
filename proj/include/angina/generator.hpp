#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "angina/corpus.hpp"
#include "angina/lexicon.hpp"
#include "angina/symptom.hpp"

namespace angina {

struct Prevalence {
  double positive_rate = 0.0;
  double negative_rate = 0.0;
};

struct GeneratorConfig {
  std::uint64_t seed = 459;
  std::size_t n_notes = 459;
  std::array<Prevalence, kNumSymptoms> prevalence = default_prevalence();
  // Chance that each of four distractor slots gets a sentence.
  double distractor_rate = 0.3;
  // Notes that receive an internally inconsistent same-day denial.
  double conflict_rate = 0.05;
  // Notes padded with a long narrative tail (exercise truncation).
  double long_note_rate = 0.035;

  Prevalence& operator[](SymptomKind s) { return prevalence[index_of(s)]; }
  const Prevalence& operator[](SymptomKind s) const { return prevalence[index_of(s)]; }

  // Positive counts from the 459-note cohort; negative counts are the
  // column totals of the reference confusion tables.
  static std::array<Prevalence, kNumSymptoms> default_prevalence();

  // Throws ConfigError when rates are out of range, positive + negative
  // exceeds 1, or a characterization is more prevalent than its parent.
  void validate() const;
};

// Labels are drawn first (exact counts, dependency-consistent), then text
// is composed from templates and checked against the rule annotator.
Corpus generate_synthetic(const GeneratorConfig& config, const rules::CueLexicon& lexicon);

// Sentences with no symptom cue (medications, vitals, social history).
const std::vector<std::string>& distractor_sentences();

}  // namespace angina
