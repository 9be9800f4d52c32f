#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "angina/annotator.hpp"
#include "angina/encoder.hpp"
#include "angina/generator.hpp"
#include "angina/pipeline.hpp"
#include "angina/segmenter.hpp"
#include "angina/tokenizer.hpp"

namespace angina::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kPipelineFailure = 3 };

struct RunPaths {
  std::string corpus;
  std::string lexicon;     // empty: built-in lexicon
  std::string vocab;       // empty: build from the corpus
  std::string checkpoint;  // empty: no final models
  std::string output_dir = "out";
};

struct RunSeeds {
  std::uint64_t corpus = 459;
  std::uint64_t init = 1;
  std::uint64_t train = 1;
};

// Everything a command needs; serializable so a run manifest can replay it.
struct RunConfig {
  RunPaths paths;
  RunSeeds seeds;
  GeneratorConfig generator;
  TokenizerConfig tokenizer;
  nn::EncoderConfig encoder;
  nn::TrainConfig train;
  std::vector<std::size_t> epoch_set = nn::kCandidateEpochs;
  std::size_t folds = 10;
  SegmenterConfig segmenter;
  rules::RuleConfig rules;
  std::vector<SymptomKind> symptoms{kAllSymptoms.begin(), kAllSymptoms.end()};
  bool multi_task = false;
  nn::MultiTaskConfig task_weights;
  std::vector<std::size_t> withhold_grid{50, 100, 150, 200, 250};

  PipelineConfig pipeline() const;
  void validate() const;
};

// Missing keys keep their defaults; unknown keys are a ConfigError. A run
// manifest is accepted too (its "config" member is used).
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);
// Output paths are left out so manifests of identical runs match.
std::string run_config_to_json(const RunConfig& config, bool include_output_dir = true);

// "2,4,8" -> {2, 4, 8}
std::vector<std::size_t> parse_count_list(std::string_view text);

// Runs one command line (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace angina::cli
