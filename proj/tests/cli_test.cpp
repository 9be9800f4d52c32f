#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "angina/cli.hpp"
#include "angina/corpus.hpp"
#include "angina/error.hpp"
#include "test_support.hpp"

namespace angina::cli {
namespace {

using testing::slurp;
using testing::TempDir;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Runs the installed binary so exit statuses are checked end to end.
int invoke_process(const std::string& args) {
  const std::string cmd = std::string("\"") + ANGINA_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// Small transformer so full cross-validation runs take seconds.
std::string write_tiny_config(const TempDir& dir) {
  const auto path = dir / "tiny.json";
  std::ofstream(path) << R"({"tokenizer": {"max_len": 32, "vocab_size": 200},
    "encoder": {"layers": 1, "heads": 2, "model_dim": 8, "ff_dim": 16}})";
  return path.string();
}

std::string generate(const TempDir& dir, std::size_t n) {
  const auto path = (dir / "corpus.jsonl").string();
  const auto r = invoke({"generate", "--n-notes", std::to_string(n), "--corpus", path});
  EXPECT_EQ(r.code, kOk) << r.err;
  return path;
}

TEST(Generate, DefaultsGive459Notes) {
  TempDir dir("cli");
  const auto r = invoke({"generate", "--out", dir.path().string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto corpus = load_corpus(dir / "corpus.jsonl");
  EXPECT_EQ(corpus.size(), 459u);
  EXPECT_EQ(line_count(slurp(dir / "corpus.jsonl")), 459u);
}

TEST(Generate, ZeroNotesGiveEmptyFile) {
  TempDir dir("cli");
  const auto r = invoke({"generate", "--n-notes", "0", "--corpus", (dir / "c.jsonl").string()});
  EXPECT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(std::filesystem::file_size(dir / "c.jsonl"), 0u);
}

TEST(Generate, InvalidPrevalenceFailsWithDiagnostic) {
  TempDir dir("cli");
  std::ofstream(dir / "bad.json") << R"({"generator": {"prevalence": {"ChestPain": {"positive": 0.9, "negative": 0.4}}}})";
  const auto r = invoke({"generate", "--config", (dir / "bad.json").string(), "--out", dir.path().string()});
  EXPECT_NE(r.code, kOk);
  EXPECT_FALSE(r.err.empty());
  EXPECT_FALSE(std::filesystem::exists(dir / "corpus.jsonl"));
}

TEST(Generate, SameSeedSameBytes) {
  TempDir dir("cli");
  ASSERT_EQ(invoke({"generate", "--n-notes", "40", "--corpus", (dir / "a.jsonl").string()}).code, kOk);
  ASSERT_EQ(invoke({"generate", "--n-notes", "40", "--corpus", (dir / "b.jsonl").string()}).code, kOk);
  ASSERT_EQ(invoke({"generate", "--n-notes", "40", "--seed-corpus", "8", "--corpus", (dir / "c.jsonl").string()}).code,
            kOk);
  EXPECT_EQ(slurp(dir / "a.jsonl"), slurp(dir / "b.jsonl"));
  EXPECT_NE(slurp(dir / "a.jsonl"), slurp(dir / "c.jsonl"));
}

TEST(ExitCodes, Usage) {
  EXPECT_EQ(invoke({}).code, kUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kUsage);
  EXPECT_EQ(invoke({"run", "--no-such-flag"}).code, kUsage);
  EXPECT_EQ(invoke({"run", "--symptom", "Headache", "--corpus", "x"}).code, kUsage);
  EXPECT_EQ(invoke({"run", "--epochs-set", "3,4", "--corpus", "x"}).code, kUsage);
  EXPECT_EQ(invoke({"run", "--epochs-set", "two"}).code, kUsage);
  EXPECT_EQ(invoke({"baseline"}).code, kUsage);
  EXPECT_EQ(invoke({"--help"}).code, kOk);
}

TEST(ExitCodes, DataErrors) {
  TempDir dir("cli");
  EXPECT_EQ(invoke({"baseline", "--corpus", (dir / "missing.jsonl").string()}).code, kDataError);
  std::ofstream(dir / "broken.jsonl") << "{oops\n";
  EXPECT_EQ(invoke({"run", "--corpus", (dir / "broken.jsonl").string()}).code, kDataError);
  EXPECT_EQ(invoke({"segment", "--text", "no section header"}).code, kDataError);
}

TEST(ExitCodes, PipelineFailureWhenOutputIsAFile) {
  TempDir dir("cli");
  const auto corpus = generate(dir, 20);
  std::ofstream(dir / "occupied") << "x";
  const auto r = invoke({"baseline", "--corpus", corpus, "--out", (dir / "occupied").string()});
  EXPECT_EQ(r.code, kPipelineFailure);
  EXPECT_NE(r.err.find("write report"), std::string::npos) << r.err;
}

TEST(ExitCodes, ProcessStatusesMatch) {
  TempDir dir("cli");
  const auto corpus = generate(dir, 20);
  std::ofstream(dir / "empty.jsonl") << "";
  std::ofstream(dir / "occupied") << "x";
  EXPECT_EQ(invoke_process("generate --n-notes 5 --corpus \"" + (dir / "p.jsonl").string() + "\""), 0);
  EXPECT_EQ(invoke_process("bogus"), 1);
  EXPECT_EQ(invoke_process("baseline --corpus \"" + (dir / "empty.jsonl").string() + "\""), 2);
  EXPECT_EQ(invoke_process("baseline --corpus \"" + corpus + "\" --out \"" + (dir / "occupied").string() + "\""), 3);
}

TEST(Baseline, GeneratedCorpusScoresPerfectly) {
  TempDir dir("cli");
  const auto corpus = generate(dir, 120);
  const auto out = dir / "report";
  const auto r = invoke({"baseline", "--corpus", corpus, "--out", out.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  std::istringstream metrics(slurp(out / "metrics.csv"));
  std::string line;
  std::getline(metrics, line);
  EXPECT_EQ(line, "symptom,precision,recall,f1,specificity,mcc,epochs");
  std::size_t rows = 0;
  while (std::getline(metrics, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 7u) << line;
    EXPECT_EQ(cells[3], "1.000000") << line;
  }
  EXPECT_EQ(rows, 6u);
  EXPECT_NE(r.out.find("F1"), std::string::npos);
}

TEST(Baseline, EmptyCorpusFails) {
  TempDir dir("cli");
  std::ofstream(dir / "empty.jsonl") << "";
  const auto r = invoke({"baseline", "--corpus", (dir / "empty.jsonl").string(), "--out", dir.path().string()});
  EXPECT_NE(r.code, kOk);
  EXPECT_NE(r.err.find("no notes"), std::string::npos) << r.err;
}

TEST(Segment, PrintsSection) {
  const auto r = invoke({"segment", "--text", "Visit\nHPI: cp x2 days\nPlan: ecg"});
  EXPECT_EQ(r.code, kOk);
  EXPECT_EQ(r.out, "cp x2 days\n");
}

TEST(Annotate, TextAndCorpus) {
  const auto r = invoke({"annotate", "--text", "HPI: denies chest pain. sob on stairs."});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("CP=negative"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("SOB=positive"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("DOE=positive"), std::string::npos) << r.out;

  TempDir dir("cli");
  const auto corpus = generate(dir, 30);
  const auto c = invoke({"annotate", "--corpus", corpus, "--out", dir.path().string()});
  ASSERT_EQ(c.code, kOk) << c.err;
  EXPECT_NE(c.out.find("30 match"), std::string::npos) << c.out;
  EXPECT_EQ(load_corpus(dir / "annotated.jsonl"), load_corpus(corpus));
}

TEST(Report, ReproducesTableFromConfusionCsv) {
  TempDir dir("cli");
  const auto r = invoke({"report", (testing::data_dir() / "reference_confusion.csv").string(), "--out", dir.path().string(),
                         "--symptom", "CP"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto metrics = slurp(dir / "metrics.csv");
  EXPECT_EQ(line_count(metrics), 2u);
  EXPECT_NE(metrics.find("ChestPain,0.926"), std::string::npos) << metrics;
  EXPECT_EQ(invoke({"report"}).code, kUsage);
}

TEST(Run, ChestPainOnlyWritesOneMetricsRow) {
  TempDir dir("cli");
  const auto corpus = generate(dir, 30);
  const auto out = dir / "run";
  const auto r = invoke({"run", "--config", write_tiny_config(dir), "--corpus", corpus, "--symptom", "ChestPain",
                         "--epochs-set", "2,4", "--out", out.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(line_count(slurp(out / "metrics.csv")), 2u);
  EXPECT_EQ(line_count(slurp(out / "curve_ChestPain.csv")), 3u);
  EXPECT_TRUE(std::filesystem::exists(out / "confusion_ChestPain.csv"));
  EXPECT_FALSE(std::filesystem::exists(out / "curve_ShortnessOfBreath.csv"));
}

TEST(Run, SixSymptomsSevenEpochPointsAndByteIdenticalRerun) {
  TempDir dir("cli");
  const auto corpus = generate(dir, 30);
  const auto first = dir / "first";
  const auto r = invoke({"run", "--config", write_tiny_config(dir), "--corpus", corpus, "--out", first.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(line_count(slurp(first / "metrics.csv")), 7u);
  std::size_t curves = 0;
  for (const auto& entry : std::filesystem::directory_iterator(first)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("curve_", 0) != 0) continue;
    ++curves;
    EXPECT_EQ(line_count(slurp(entry.path())), 8u) << name;
  }
  EXPECT_EQ(curves, 6u);

  const auto second = dir / "second";
  const auto again =
      invoke({"run", "--config", (first / "manifest.json").string(), "--out", second.string()});
  ASSERT_EQ(again.code, kOk) << again.err;
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(first)) {
    const auto name = entry.path().filename();
    ASSERT_TRUE(std::filesystem::exists(second / name)) << name;
    EXPECT_EQ(slurp(entry.path()), slurp(second / name)) << name;
    ++compared;
  }
  EXPECT_EQ(compared, 1u + 1u + 6u + 6u + 1u);  // vocab, metrics, confusions, curves, manifest
}

TEST(Run, ManifestRecordsSeedsAndHashes) {
  TempDir dir("cli");
  const auto corpus = generate(dir, 30);
  const auto out = dir / "run";
  ASSERT_EQ(invoke({"run", "--config", write_tiny_config(dir), "--corpus", corpus, "--symptom", "SOB",
                    "--epochs-set", "2", "--seed-init", "5", "--seed-train", "6", "--out", out.string()})
                .code,
            kOk);
  const auto manifest = slurp(out / "manifest.json");
  for (const char* key : {"\"init\": 5", "\"train\": 6", "\"corpus\": 459", "\"hashes\"", "\"lexicon\"",
                          "\"metrics.csv\"", "\"truncation\""})
    EXPECT_NE(manifest.find(key), std::string::npos) << key;
  EXPECT_EQ(manifest.find("output_dir"), std::string::npos);
  const auto replay = load_run_config(out / "manifest.json");
  EXPECT_EQ(replay.seeds.init, 5u);
  EXPECT_EQ(replay.epoch_set, (std::vector<std::size_t>{2}));
  EXPECT_EQ(replay.symptoms, (std::vector<SymptomKind>{SymptomKind::ShortnessOfBreath}));
}

TEST(Run, CheckpointWritesFinalModels) {
  TempDir dir("cli");
  const auto corpus = generate(dir, 20);
  const auto r = invoke({"run", "--config", write_tiny_config(dir), "--corpus", corpus, "--symptom", "CP",
                         "--epochs-set", "2", "--checkpoint", (dir / "models").string(), "--out",
                         (dir / "run").string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto model = nn::load_checkpoint(dir / "models" / "model_ChestPain.bin");
  EXPECT_EQ(model.config().max_len, 32u);
}

TEST(Withhold, WritesOneRowPerGridValue) {
  TempDir dir("cli");
  const auto corpus = generate(dir, 40);
  const auto r = invoke({"withhold", "--config", write_tiny_config(dir), "--corpus", corpus, "--symptom", "CP",
                         "--epochs-set", "2", "--grid", "8,4", "--out", dir.path().string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto csv = slurp(dir / "withholding_ChestPain.csv");
  EXPECT_EQ(line_count(csv), 3u);
  EXPECT_NE(csv.find("\n4,"), std::string::npos);
  EXPECT_LT(csv.find("\n4,"), csv.find("\n8,"));
  EXPECT_EQ(invoke({"withhold", "--corpus", corpus, "--symptom", "CP", "--grid", "9999"}).code, kUsage);
}

TEST(RunConfigFile, RoundTripsAndRejectsUnknownKeys) {
  RunConfig c;
  c.seeds.train = 77;
  c.epoch_set = {4, 8};
  c.symptoms = {SymptomKind::ExertionalCP};
  c.encoder.model_dim = 32;
  const RunConfig back = parse_run_config(run_config_to_json(c));
  EXPECT_EQ(back.seeds.train, 77u);
  EXPECT_EQ(back.epoch_set, c.epoch_set);
  EXPECT_EQ(back.symptoms, c.symptoms);
  EXPECT_EQ(back.encoder.model_dim, 32u);
  EXPECT_EQ(run_config_to_json(back), run_config_to_json(c));
  EXPECT_THROW(parse_run_config(R"({"encoder": {"depth": 3}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"folds": "ten"})"), ConfigError);
  EXPECT_THROW(parse_run_config("not json"), ConfigError);
  EXPECT_EQ(parse_count_list("2, 4,8"), (std::vector<std::size_t>{2, 4, 8}));
  EXPECT_THROW(parse_count_list("2,,4"), ConfigError);
}

}  // namespace
}  // namespace angina::cli
