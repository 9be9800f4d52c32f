#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "angina/symptom.hpp"

namespace angina::eval {

// counts[predicted][actual] in Absent, Positive, Negative order.
struct Confusion3 {
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> counts{};

  std::size_t& at(Label3 predicted, Label3 actual) {
    return counts[index_of(predicted)][index_of(actual)];
  }
  std::size_t at(Label3 predicted, Label3 actual) const {
    return counts[index_of(predicted)][index_of(actual)];
  }
  std::size_t total() const;
  Confusion3& operator+=(const Confusion3& other);
  bool operator==(const Confusion3&) const = default;
};

struct Confusion2 {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion2&) const = default;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double specificity = 0.0;
  double mcc = 0.0;
};

Confusion3 accumulate_confusion3(std::span<const Label3> predicted, std::span<const Label3> gold);

// Absent and Negative merge into one non-positive class.
Confusion2 collapse(const Confusion3& m);

// Zero denominators yield 0 for the affected metric.
Metrics metrics(const Confusion2& c);

// Generalized (Gorodkin) MCC over the three classes.
double multiclass_mcc(const Confusion3& m);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

struct FoldPlan {
  std::size_t k = 0;
  std::vector<Fold> folds;
};

// One seeded permutation cut into k near-equal blocks; fold i tests on
// block i, validates on block (i + 1) mod k and trains on the rest.
FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

// Pooled-validation MCC keyed by epoch count.
struct EpochCurve {
  std::map<std::size_t, double> points;
};

// Validation predictions of one fold at each recorded epoch count.
struct FoldPredictions {
  std::vector<Label3> gold;
  std::map<std::size_t, std::vector<Label3>> predicted;
};

// Pools every fold per epoch count, then scores with multiclass_mcc.
// Throws DataError when a fold misses one of `epochs`.
EpochCurve build_epoch_curve(std::span<const FoldPredictions> folds,
                             std::span<const std::size_t> epochs);

// Argmax; ties go to the smaller epoch count.
std::size_t select_epochs(const EpochCurve& curve);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t df = 0;
};

// Goodness of fit of positive counts among truncated notes against the
// overall positive rates, E = rate * truncated_n. Cells with E = 0 are
// dropped and df = cells - 1.
ChiSquareResult chi_square_truncation(std::span<const std::size_t> truncated_positive_counts,
                                      std::span<const double> overall_positive_rates,
                                      std::size_t truncated_n);

// Upper tail of the chi-square distribution.
double chi_square_survival(double statistic, double df);

}  // namespace angina::eval
