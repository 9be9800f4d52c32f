#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "angina/annotator.hpp"
#include "angina/corpus.hpp"
#include "angina/encoder.hpp"
#include "angina/eval.hpp"
#include "angina/segmenter.hpp"
#include "angina/tokenizer.hpp"

namespace angina {

// Encoded HPI sections with their gold labels.
struct PreparedData {
  std::vector<TokenizedInput> inputs;
  std::vector<SymptomLabels> gold;
  std::size_t truncated = 0;
  std::size_t vocab_size = 0;
};

// Segments (whole text when there is no header) and encodes every note.
PreparedData prepare_inputs(const Corpus& corpus, const Vocabulary& vocab,
                            const TokenizerConfig& tokenizer, const SegmenterConfig& segmenter);

struct PipelineConfig {
  TokenizerConfig tokenizer;
  // `vocab_size`, `max_len` and `seed` are taken from the data and seeds.
  nn::EncoderConfig encoder;
  // `epochs` and `checkpoints` are overwritten from `epoch_set`.
  nn::TrainConfig train;
  std::vector<std::size_t> epoch_set = nn::kCandidateEpochs;
  std::size_t folds = 10;
  std::uint64_t fold_seed = 459;
  std::uint64_t init_seed = 1;
  std::uint64_t train_seed = 1;
  bool multi_task = false;
  nn::MultiTaskConfig task_weights;

  void validate() const;
};

struct SymptomReport {
  SymptomKind symptom = SymptomKind::ChestPain;
  eval::EpochCurve curve;
  std::size_t selected_epochs = 0;  // 0 for the rule baseline
  eval::Confusion3 test_confusion;
  eval::Metrics test_metrics;
};

struct TruncationReport {
  std::size_t truncated = 0;
  std::size_t total = 0;
  eval::ChiSquareResult chi_square;
};

struct RunReport {
  std::vector<SymptomReport> symptoms;
  TruncationReport truncation;
};

// Positive-count chi-square of truncated notes against the whole corpus.
TruncationReport truncation_check(const PreparedData& data);

// Ten-fold train/validate/test: one training run per fold records
// validation and test predictions at every epoch count in `epoch_set`;
// the pooled-validation MCC curve picks the epoch count whose pooled test
// predictions are reported.
RunReport cross_validate(const PreparedData& data, std::span<const SymptomKind> symptoms,
                         const PipelineConfig& config);

// The rule annotator scored as a predictor against the gold labels.
RunReport rule_baseline(const Corpus& corpus, const rules::CueLexicon& lexicon,
                        const rules::RuleConfig& rules, const SegmenterConfig& segmenter,
                        std::span<const SymptomKind> symptoms);

// Keeps `n_positives` seeded-random positives of `symptom` (original order)
// and every non-positive note.
Corpus withhold_positives(const Corpus& corpus, SymptomKind symptom, std::size_t n_positives,
                          std::uint64_t seed);

struct WithholdingRow {
  std::size_t n_positives = 0;
  std::size_t selected_epochs = 0;
  eval::Metrics metrics;
};

// Rows ordered by n_positives. Throws ConfigError when a grid value exceeds
// the available positives.
std::vector<WithholdingRow> withholding_sweep(const Corpus& corpus, SymptomKind symptom,
                                              std::span<const std::size_t> grid,
                                              const Vocabulary& vocab,
                                              const SegmenterConfig& segmenter,
                                              const PipelineConfig& config,
                                              std::uint64_t subsample_seed);

}  // namespace angina
