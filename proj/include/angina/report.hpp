#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "angina/eval.hpp"
#include "angina/pipeline.hpp"

namespace angina::report {

// symptom,precision,recall,f1,specificity,mcc,epochs
void write_metrics_csv(std::ostream& out, const std::vector<SymptomReport>& rows);
// predicted,absent,positive,negative with one row per predicted class.
void write_confusion_csv(std::ostream& out, const eval::Confusion3& m);
// epoch,mcc
void write_curve_csv(std::ostream& out, const eval::EpochCurve& curve);

eval::Confusion3 read_confusion_csv(std::istream& in);
// symptom,predicted,absent,positive,negative (several symptoms per file).
std::map<SymptomKind, eval::Confusion3> read_confusion_table(std::istream& in);

// Writes metrics.csv, confusion_<Symptom>.csv and curve_<Symptom>.csv
// (curves only when present). Returns the files written.
std::vector<std::filesystem::path> write_bundle(const std::filesystem::path& dir,
                                                const RunReport& report);

// Fixed-width text table with three decimals, one column per symptom.
std::string format_metrics_table(const std::vector<SymptomReport>& rows);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace angina::report
