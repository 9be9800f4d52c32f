#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "angina/symptom.hpp"

namespace angina {

struct AnnotatedNote {
  std::string id;
  std::string hpi_text;
  SymptomLabels labels;

  bool operator==(const AnnotatedNote&) const = default;
};

// True when every characterization implies its parent symptom
// (SSCP/EXCP/RECP positive => CP positive, DOE positive => SOB positive).
bool dependencies_hold(const SymptomLabels& labels);

// Ordered collection of notes with unique ids. Immutable once built.
class Corpus {
 public:
  Corpus() = default;
  // Throws DataError on duplicate ids.
  explicit Corpus(std::vector<AnnotatedNote> notes);

  const std::vector<AnnotatedNote>& notes() const { return notes_; }
  std::size_t size() const { return notes_.size(); }
  bool empty() const { return notes_.empty(); }
  const AnnotatedNote& operator[](std::size_t i) const { return notes_[i]; }

  auto begin() const { return notes_.begin(); }
  auto end() const { return notes_.end(); }

  bool operator==(const Corpus&) const = default;

 private:
  std::vector<AnnotatedNote> notes_;
};

// One JSON object per line: {"id":..., "hpi_text":..., "labels":{...}}.
std::string note_to_json_line(const AnnotatedNote& note);
// `line_number` is only used in error messages.
AnnotatedNote note_from_json_line(const std::string& line, std::size_t line_number);

Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct SymptomCounts {
  std::size_t absent = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;

  std::size_t total() const { return absent + positive + negative; }
  // (positive + negative) / total, 0 for an empty corpus.
  double mention_rate() const;
  // positive / negative, 0 when there are no negative mentions.
  double positive_negative_ratio() const;
};

struct CorpusStats {
  std::array<SymptomCounts, kNumSymptoms> per_symptom{};
  std::size_t notes = 0;

  const SymptomCounts& operator[](SymptomKind s) const { return per_symptom[index_of(s)]; }
  // Pooled over all six symptoms.
  double positive_negative_ratio() const;
};

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace angina
