#include "angina/pipeline.hpp"

#include <algorithm>
#include <set>

#include "angina/error.hpp"
#include "angina/rng.hpp"

namespace angina {
namespace {

constexpr std::uint64_t kMultiTaskSalt = 1'000'000;

std::uint64_t run_salt(std::size_t symptom_slot, std::size_t fold) {
  return static_cast<std::uint64_t>(symptom_slot) * 1000 + fold;
}

nn::EncoderConfig model_config(const PreparedData& data, const PipelineConfig& config,
                               std::size_t tasks, std::uint64_t seed) {
  nn::EncoderConfig enc = config.encoder;
  enc.vocab_size = data.vocab_size;
  enc.max_len = data.inputs.front().ids.size();
  enc.tasks = tasks;
  enc.seed = seed;
  return enc;
}

nn::TrainConfig train_config(const PipelineConfig& config, std::uint64_t seed) {
  nn::TrainConfig t = config.train;
  t.epochs = *std::max_element(config.epoch_set.begin(), config.epoch_set.end());
  t.checkpoints = config.epoch_set;
  t.seed = seed;
  return t;
}

std::vector<TokenizedInput> gather(const PreparedData& data, const std::vector<std::size_t>& idx) {
  std::vector<TokenizedInput> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data.inputs[i]);
  return out;
}

std::vector<Label3> gold_of(const PreparedData& data, const std::vector<std::size_t>& idx,
                            SymptomKind s) {
  std::vector<Label3> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data.gold[i][s]);
  return out;
}

std::vector<nn::Example> examples(const PreparedData& data, const std::vector<std::size_t>& idx,
                                  SymptomKind s) {
  std::vector<nn::Example> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back({data.inputs[i], data.gold[i][s]});
  return out;
}

// Per-fold predictions of one symptom at every recorded epoch count.
struct FoldOutcome {
  eval::FoldPredictions validation;
  eval::FoldPredictions test;
};

SymptomReport summarize(SymptomKind s, const std::vector<FoldOutcome>& folds,
                        const std::vector<std::size_t>& epoch_set) {
  std::vector<eval::FoldPredictions> val, test;
  for (const auto& f : folds) {
    val.push_back(f.validation);
    test.push_back(f.test);
  }
  SymptomReport r;
  r.symptom = s;
  r.curve = eval::build_epoch_curve(val, epoch_set);
  r.selected_epochs = eval::select_epochs(r.curve);
  for (const auto& f : test)
    r.test_confusion += eval::accumulate_confusion3(f.predicted.at(r.selected_epochs), f.gold);
  r.test_metrics = eval::metrics(eval::collapse(r.test_confusion));
  return r;
}

RunReport single_task_runs(const PreparedData& data, std::span<const SymptomKind> symptoms,
                           const PipelineConfig& config, const eval::FoldPlan& plan) {
  RunReport report;
  for (SymptomKind s : symptoms) {
    std::vector<FoldOutcome> outcomes;
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
      const eval::Fold& fold = plan.folds[f];
      const std::uint64_t salt = run_salt(index_of(s), f);
      const auto train_set = examples(data, fold.train, s);
      const auto val_set = examples(data, fold.validation, s);
      const auto test_inputs = gather(data, fold.test);

      FoldOutcome outcome;
      outcome.validation.gold = gold_of(data, fold.validation, s);
      outcome.test.gold = gold_of(data, fold.test, s);
      auto on_checkpoint = [&](std::size_t epoch, const nn::ModelParams& params) {
        outcome.test.predicted[epoch] = nn::predict_all(params, test_inputs);
      };
      nn::TrainResult result =
          nn::train(nn::init_params(model_config(data, config, 1, mix_seed(config.init_seed, salt))),
                    train_set, val_set, train_config(config, mix_seed(config.train_seed, salt)),
                    on_checkpoint);
      outcome.validation.predicted = std::move(result.val_predictions);
      outcomes.push_back(std::move(outcome));
    }
    report.symptoms.push_back(summarize(s, outcomes, config.epoch_set));
  }
  return report;
}

RunReport multi_task_runs(const PreparedData& data, std::span<const SymptomKind> symptoms,
                          const PipelineConfig& config, const eval::FoldPlan& plan) {
  std::vector<std::vector<FoldOutcome>> outcomes(kNumSymptoms);
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const eval::Fold& fold = plan.folds[f];
    const std::uint64_t salt = kMultiTaskSalt + f;
    std::vector<nn::MultiExample> train_set, val_set;
    for (std::size_t i : fold.train) train_set.push_back({data.inputs[i], data.gold[i]});
    for (std::size_t i : fold.validation) val_set.push_back({data.inputs[i], data.gold[i]});
    const auto test_inputs = gather(data, fold.test);

    std::map<std::size_t, std::vector<nn::Matrix>> test_logits;
    auto on_checkpoint = [&](std::size_t epoch, const nn::ModelParams& params) {
      test_logits[epoch] = nn::forward_all_tasks(params, test_inputs);
    };
    nn::MultiTaskTrainResult result = nn::train_multi_task(
        nn::init_params(model_config(data, config, kNumSymptoms, mix_seed(config.init_seed, salt))),
        train_set, val_set, train_config(config, mix_seed(config.train_seed, salt)),
        config.task_weights, on_checkpoint);

    for (SymptomKind s : kAllSymptoms) {
      FoldOutcome outcome;
      outcome.validation.gold = gold_of(data, fold.validation, s);
      outcome.test.gold = gold_of(data, fold.test, s);
      for (const auto& [epoch, predicted] : result.val_predictions) {
        auto& v = outcome.validation.predicted[epoch];
        for (const auto& labels : predicted) v.push_back(labels[s]);
      }
      for (const auto& [epoch, logits] : test_logits) {
        const nn::Matrix& m = logits[index_of(s)];
        auto& t = outcome.test.predicted[epoch];
        for (Eigen::Index i = 0; i < m.rows(); ++i)
          t.push_back(nn::argmax_label(std::span<const double>(m.row(i).data(), kNumLabels)));
      }
      outcomes[index_of(s)].push_back(std::move(outcome));
    }
  }
  RunReport report;
  for (SymptomKind s : symptoms)
    report.symptoms.push_back(summarize(s, outcomes[index_of(s)], config.epoch_set));
  return report;
}

}  // namespace

PreparedData prepare_inputs(const Corpus& corpus, const Vocabulary& vocab,
                            const TokenizerConfig& tokenizer, const SegmenterConfig& segmenter) {
  PreparedData data;
  data.vocab_size = vocab.size();
  for (const auto& note : corpus) {
    TokenizedInput input = encode(hpi_or_whole(note.hpi_text, segmenter), vocab, tokenizer);
    if (input.truncated) ++data.truncated;
    data.inputs.push_back(std::move(input));
    data.gold.push_back(note.labels);
  }
  return data;
}

void PipelineConfig::validate() const {
  tokenizer.validate();
  encoder.validate();
  if (epoch_set.empty()) throw ConfigError("epoch set is empty");
  std::set<std::size_t> seen;
  for (std::size_t e : epoch_set) {
    if (std::find(nn::kCandidateEpochs.begin(), nn::kCandidateEpochs.end(), e) ==
        nn::kCandidateEpochs.end())
      throw ConfigError("epoch count " + std::to_string(e) + " is not a candidate (2..128, powers of 2)");
    if (!seen.insert(e).second) throw ConfigError("epoch count " + std::to_string(e) + " repeated");
  }
  if (folds < 2) throw ConfigError("at least two folds are required");
  train_config(*this, train_seed).validate();
  if (multi_task) task_weights.validate();
}

TruncationReport truncation_check(const PreparedData& data) {
  TruncationReport r;
  r.total = data.inputs.size();
  std::array<std::size_t, kNumSymptoms> all{}, truncated{};
  for (std::size_t i = 0; i < data.inputs.size(); ++i) {
    if (data.inputs[i].truncated) ++r.truncated;
    for (SymptomKind s : kAllSymptoms) {
      if (data.gold[i][s] != Label3::Positive) continue;
      ++all[index_of(s)];
      if (data.inputs[i].truncated) ++truncated[index_of(s)];
    }
  }
  if (r.truncated == 0 || r.total == 0) return r;
  std::array<double, kNumSymptoms> rates{};
  for (std::size_t k = 0; k < kNumSymptoms; ++k)
    rates[k] = static_cast<double>(all[k]) / static_cast<double>(r.total);
  r.chi_square = eval::chi_square_truncation(truncated, rates, r.truncated);
  return r;
}

RunReport cross_validate(const PreparedData& data, std::span<const SymptomKind> symptoms,
                         const PipelineConfig& config) {
  config.validate();
  if (data.inputs.empty()) throw DataError("no notes to cross-validate");
  if (symptoms.empty()) throw ConfigError("no symptoms selected");
  const eval::FoldPlan plan = eval::make_folds(data.inputs.size(), config.folds, config.fold_seed);
  RunReport report = config.multi_task ? multi_task_runs(data, symptoms, config, plan)
                                       : single_task_runs(data, symptoms, config, plan);
  report.truncation = truncation_check(data);
  return report;
}

RunReport rule_baseline(const Corpus& corpus, const rules::CueLexicon& lexicon,
                        const rules::RuleConfig& rules, const SegmenterConfig& segmenter,
                        std::span<const SymptomKind> symptoms) {
  std::vector<SymptomLabels> predicted;
  predicted.reserve(corpus.size());
  for (const auto& note : corpus)
    predicted.push_back(rules::label_note(hpi_or_whole(note.hpi_text, segmenter), lexicon, rules));
  RunReport report;
  for (SymptomKind s : symptoms) {
    SymptomReport r;
    r.symptom = s;
    for (std::size_t i = 0; i < corpus.size(); ++i)
      ++r.test_confusion.at(predicted[i][s], corpus[i].labels[s]);
    r.test_metrics = eval::metrics(eval::collapse(r.test_confusion));
    report.symptoms.push_back(std::move(r));
  }
  return report;
}

Corpus withhold_positives(const Corpus& corpus, SymptomKind symptom, std::size_t n_positives,
                          std::uint64_t seed) {
  std::vector<std::size_t> positives;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (corpus[i].labels[symptom] == Label3::Positive) positives.push_back(i);
  if (n_positives > positives.size())
    throw ConfigError("cannot keep " + std::to_string(n_positives) + " positives of " +
                      std::string(symptom_name(symptom)) + "; only " +
                      std::to_string(positives.size()) + " available");
  Rng rng(seed);
  rng.shuffle(std::span(positives));
  const std::set<std::size_t> kept(positives.begin(), positives.begin() + static_cast<std::ptrdiff_t>(n_positives));
  std::vector<AnnotatedNote> notes;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (corpus[i].labels[symptom] != Label3::Positive || kept.contains(i)) notes.push_back(corpus[i]);
  return Corpus(std::move(notes));
}

std::vector<WithholdingRow> withholding_sweep(const Corpus& corpus, SymptomKind symptom,
                                              std::span<const std::size_t> grid,
                                              const Vocabulary& vocab,
                                              const SegmenterConfig& segmenter,
                                              const PipelineConfig& config,
                                              std::uint64_t subsample_seed) {
  std::vector<std::size_t> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t available = 0;
  for (const auto& note : corpus) available += note.labels[symptom] == Label3::Positive;
  if (!sorted.empty() && sorted.back() > available)
    throw ConfigError("withholding grid value " + std::to_string(sorted.back()) + " exceeds the " +
                      std::to_string(available) + " available positives");
  std::vector<WithholdingRow> rows;
  const SymptomKind selected[] = {symptom};
  for (std::size_t n : sorted) {
    const Corpus subset = withhold_positives(corpus, symptom, n, subsample_seed);
    const PreparedData data = prepare_inputs(subset, vocab, config.tokenizer, segmenter);
    const RunReport run = cross_validate(data, selected, config);
    rows.push_back({n, run.symptoms.front().selected_epochs, run.symptoms.front().test_metrics});
  }
  return rows;
}

}  // namespace angina
