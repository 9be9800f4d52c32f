#include "angina/report.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "angina/error.hpp"

namespace angina::report {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string trim(std::string s) {
  const auto blank = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && blank(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && blank(s[i])) ++i;
  return s.substr(i);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::size_t parse_count(const std::string& cell, std::size_t line) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size() || (!cell.empty() && cell[0] == '-'))
    throw DataError("line " + std::to_string(line) + ": '" + cell + "' is not a count");
  return static_cast<std::size_t>(v);
}

Label3 parse_label_cell(const std::string& cell, std::size_t line) {
  const auto l = parse_label(cell);
  if (!l) throw DataError("line " + std::to_string(line) + ": unknown label '" + cell + "'");
  return *l;
}

void expect_header(const std::vector<std::string>& got, const std::vector<std::string>& want) {
  if (got != want) {
    std::string joined;
    for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
    throw DataError("expected CSV header " + joined);
  }
}

bool next_line(std::istream& in, std::string& line, std::size_t& number) {
  while (std::getline(in, line)) {
    ++number;
    if (!trim(line).empty()) return true;
  }
  return false;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<SymptomReport>& rows) {
  out << "symptom,precision,recall,f1,specificity,mcc,epochs\n";
  for (const auto& r : rows) {
    const auto& m = r.test_metrics;
    out << symptom_name(r.symptom) << ',' << fixed(m.precision, 6) << ',' << fixed(m.recall, 6)
        << ',' << fixed(m.f1, 6) << ',' << fixed(m.specificity, 6) << ',' << fixed(m.mcc, 6)
        << ',' << r.selected_epochs << '\n';
  }
}

void write_confusion_csv(std::ostream& out, const eval::Confusion3& m) {
  out << "predicted,absent,positive,negative\n";
  for (Label3 p : kAllLabels) {
    out << label_name(p);
    for (Label3 a : kAllLabels) out << ',' << m.at(p, a);
    out << '\n';
  }
}

void write_curve_csv(std::ostream& out, const eval::EpochCurve& curve) {
  out << "epoch,mcc\n";
  for (const auto& [epoch, mcc] : curve.points) out << epoch << ',' << fixed(mcc, 6) << '\n';
}

eval::Confusion3 read_confusion_csv(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  if (!next_line(in, line, number)) throw DataError("empty confusion CSV");
  expect_header(split_csv(line), {"predicted", "absent", "positive", "negative"});
  eval::Confusion3 m;
  std::array<bool, kNumLabels> seen{};
  while (next_line(in, line, number)) {
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw DataError("line " + std::to_string(number) + ": expected 4 cells");
    const Label3 p = parse_label_cell(cells[0], number);
    if (seen[index_of(p)]) throw DataError("line " + std::to_string(number) + ": repeated row");
    seen[index_of(p)] = true;
    for (std::size_t a = 0; a < kNumLabels; ++a) m.at(p, kAllLabels[a]) = parse_count(cells[a + 1], number);
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw DataError("confusion CSV needs one row per predicted label");
  return m;
}

std::map<SymptomKind, eval::Confusion3> read_confusion_table(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  if (!next_line(in, line, number)) throw DataError("empty confusion table");
  expect_header(split_csv(line), {"symptom", "predicted", "absent", "positive", "negative"});
  std::map<SymptomKind, eval::Confusion3> out;
  std::map<SymptomKind, std::array<bool, kNumLabels>> seen;
  while (next_line(in, line, number)) {
    const auto cells = split_csv(line);
    if (cells.size() != 5) throw DataError("line " + std::to_string(number) + ": expected 5 cells");
    const auto s = parse_symptom(cells[0]);
    if (!s) throw DataError("line " + std::to_string(number) + ": unknown symptom '" + cells[0] + "'");
    const Label3 p = parse_label_cell(cells[1], number);
    auto& rows = seen[*s];
    if (rows[index_of(p)]) throw DataError("line " + std::to_string(number) + ": repeated row");
    rows[index_of(p)] = true;
    for (std::size_t a = 0; a < kNumLabels; ++a)
      out[*s].at(p, kAllLabels[a]) = parse_count(cells[a + 2], number);
  }
  for (const auto& [s, rows] : seen)
    if (std::find(rows.begin(), rows.end(), false) != rows.end())
      throw DataError(std::string(symptom_name(s)) + " is missing predicted-label rows");
  return out;
}

std::vector<std::filesystem::path> write_bundle(const std::filesystem::path& dir,
                                                const RunReport& report) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::filesystem::path& path, auto&& writer) {
    std::ostringstream out;
    writer(out);
    write_file(path, out.str());
    written.push_back(path);
  };
  emit(dir / "metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, report.symptoms); });
  for (const auto& r : report.symptoms) {
    const std::string name(symptom_name(r.symptom));
    emit(dir / ("confusion_" + name + ".csv"), [&](std::ostream& o) { write_confusion_csv(o, r.test_confusion); });
    if (!r.curve.points.empty())
      emit(dir / ("curve_" + name + ".csv"), [&](std::ostream& o) { write_curve_csv(o, r.curve); });
  }
  return written;
}

std::string format_metrics_table(const std::vector<SymptomReport>& rows) {
  std::ostringstream out;
  char buf[32];
  auto cell = [&](const std::string& s, int width) {
    std::snprintf(buf, sizeof(buf), "%*s", width, s.c_str());
    out << buf;
  };
  cell("", 12);
  for (const auto& r : rows) cell(std::string(symptom_abbrev(r.symptom)), 8);
  out << '\n';
  const std::pair<const char*, double eval::Metrics::*> fields[] = {
      {"Precision", &eval::Metrics::precision}, {"Recall", &eval::Metrics::recall},
      {"F1", &eval::Metrics::f1},               {"Specificity", &eval::Metrics::specificity},
      {"MCC", &eval::Metrics::mcc}};
  for (const auto& [label, field] : fields) {
    std::snprintf(buf, sizeof(buf), "%-12s", label);
    out << buf;
    for (const auto& r : rows) cell(fixed(r.test_metrics.*field, 3), 8);
    out << '\n';
  }
  std::snprintf(buf, sizeof(buf), "%-12s", "Epochs");
  out << buf;
  for (const auto& r : rows) cell(r.selected_epochs ? std::to_string(r.selected_epochs) : "-", 8);
  out << '\n';
  return out.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace angina::report
