#include "angina/corpus.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "angina/error.hpp"

namespace angina {

using nlohmann::json;

bool dependencies_hold(const SymptomLabels& labels) {
  const bool cp = labels[SymptomKind::ChestPain] == Label3::Positive;
  const bool sob = labels[SymptomKind::ShortnessOfBreath] == Label3::Positive;
  auto pos = [&](SymptomKind s) { return labels[s] == Label3::Positive; };
  if ((pos(SymptomKind::SubsternalCP) || pos(SymptomKind::ExertionalCP) ||
       pos(SymptomKind::RestReliefCP)) &&
      !cp)
    return false;
  if (pos(SymptomKind::DyspneaOnExertion) && !sob) return false;
  return true;
}

Corpus::Corpus(std::vector<AnnotatedNote> notes) : notes_(std::move(notes)) {
  std::set<std::string> seen;
  for (const auto& n : notes_) {
    if (!seen.insert(n.id).second) throw DataError("duplicate note id '" + n.id + "'");
  }
}

std::string note_to_json_line(const AnnotatedNote& note) {
  // ordered_json keeps the id, hpi_text, labels field order.
  nlohmann::ordered_json labels = nlohmann::ordered_json::object();
  for (SymptomKind s : kAllSymptoms) {
    labels[std::string(symptom_name(s))] = std::string(label_name(note.labels[s]));
  }
  nlohmann::ordered_json j;
  j["id"] = note.id;
  j["hpi_text"] = note.hpi_text;
  j["labels"] = std::move(labels);
  return j.dump();
}

AnnotatedNote note_from_json_line(const std::string& line, std::size_t line_number) {
  const std::string where = "line " + std::to_string(line_number) + ": ";
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(where + "malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw DataError(where + "expected a JSON object");
  auto require_string = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
      throw DataError(where + "missing or non-string field '" + key + "'");
    return it->get<std::string>();
  };
  AnnotatedNote note;
  note.id = require_string("id");
  note.hpi_text = require_string("hpi_text");
  auto labels = j.find("labels");
  if (labels == j.end() || !labels->is_object())
    throw DataError(where + "missing 'labels' object");
  for (SymptomKind s : kAllSymptoms) {
    auto it = labels->find(std::string(symptom_name(s)));
    if (it == labels->end())
      throw DataError(where + "missing label for " + std::string(symptom_name(s)));
    if (!it->is_string()) throw DataError(where + "label values must be strings");
    auto parsed = parse_label(it->get<std::string>());
    if (!parsed) throw DataError(where + "unknown label '" + it->get<std::string>() + "'");
    note.labels[s] = *parsed;
  }
  return note;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  std::vector<AnnotatedNote> notes;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    AnnotatedNote note = note_from_json_line(line, line_number);
    if (!seen.insert(note.id).second)
      throw DataError("line " + std::to_string(line_number) + ": duplicate note id '" + note.id +
                      "'");
    notes.push_back(std::move(note));
  }
  return Corpus(std::move(notes));
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write corpus file " + path.string());
  for (const auto& note : corpus) out << note_to_json_line(note) << '\n';
  out.flush();
  if (!out) throw DataError("write failed for corpus file " + path.string());
}

double SymptomCounts::mention_rate() const {
  const std::size_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(positive + negative) / static_cast<double>(n);
}

double SymptomCounts::positive_negative_ratio() const {
  return negative == 0 ? 0.0 : static_cast<double>(positive) / static_cast<double>(negative);
}

double CorpusStats::positive_negative_ratio() const {
  std::size_t pos = 0, neg = 0;
  for (const auto& c : per_symptom) {
    pos += c.positive;
    neg += c.negative;
  }
  return neg == 0 ? 0.0 : static_cast<double>(pos) / static_cast<double>(neg);
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.notes = corpus.size();
  for (const auto& note : corpus) {
    for (SymptomKind s : kAllSymptoms) {
      auto& c = stats.per_symptom[index_of(s)];
      switch (note.labels[s]) {
        case Label3::Absent: ++c.absent; break;
        case Label3::Positive: ++c.positive; break;
        case Label3::Negative: ++c.negative; break;
      }
    }
  }
  return stats;
}

}  // namespace angina
