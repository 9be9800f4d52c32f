#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "angina/error.hpp"
#include "angina/eval.hpp"
#include "angina/rng.hpp"
#include "oracles.hpp"

namespace angina::eval {
namespace {

Confusion3 matrix(std::array<std::array<std::size_t, 3>, 3> rows) {
  Confusion3 m;
  m.counts = rows;
  return m;
}

const Confusion3 kChestPain = matrix({{{90, 4, 1}, {8, 226, 10}, {14, 9, 97}}});
const Confusion3 kSob = matrix({{{136, 7, 2}, {18, 186, 11}, {12, 12, 75}}});
const Confusion3 kDoe = matrix({{{245, 14, 6}, {38, 137, 6}, {7, 3, 3}}});

using testing::mcc_by_correlation;
using testing::survival_by_simpson;

TEST(Confusion, EmptyListsGiveZeroMatrix) {
  EXPECT_EQ(accumulate_confusion3({}, {}), Confusion3{});
}

TEST(Confusion, IdenticalListsGiveDiagonal) {
  const std::vector<Label3> labels{Label3::Absent, Label3::Positive, Label3::Positive,
                                   Label3::Negative};
  const auto m = accumulate_confusion3(labels, labels);
  EXPECT_EQ(m, matrix({{{1, 0, 0}, {0, 2, 0}, {0, 0, 1}}}));
}

TEST(Confusion, MatchesCountingOracle) {
  Rng rng(17);
  std::vector<Label3> pred(100), gold(100);
  for (std::size_t i = 0; i < 100; ++i) {
    pred[i] = kAllLabels[rng.uniform_index(3)];
    gold[i] = kAllLabels[rng.uniform_index(3)];
  }
  const auto m = accumulate_confusion3(pred, gold);
  for (Label3 p : kAllLabels)
    for (Label3 a : kAllLabels) {
      std::size_t tally = 0;
      for (std::size_t i = 0; i < 100; ++i) tally += pred[i] == p && gold[i] == a;
      EXPECT_EQ(m.at(p, a), tally);
    }
  EXPECT_EQ(m.total(), 100u);
}

TEST(Confusion, LengthMismatchThrows) {
  const std::vector<Label3> a{Label3::Absent}, b;
  EXPECT_THROW(accumulate_confusion3(a, b), DataError);
}

TEST(Collapse, ChestPainTable) {
  const auto c = collapse(kChestPain);
  EXPECT_EQ(c, (Confusion2{.tp = 226, .fp = 18, .tn = 202, .fn = 13}));
}

TEST(Collapse, SobTable) {
  const auto c = collapse(kSob);
  EXPECT_EQ(c, (Confusion2{.tp = 186, .fp = 29, .tn = 225, .fn = 19}));
}

TEST(Collapse, ZeroMatrix) { EXPECT_EQ(collapse(Confusion3{}), Confusion2{}); }

TEST(Collapse, PreservesTotal) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    Confusion3 m;
    for (auto& row : m.counts)
      for (auto& v : row) v = rng.uniform_index(40);
    EXPECT_EQ(collapse(m).total(), m.total());
  }
}

TEST(Metrics, ChestPainColumn) {
  const auto m = metrics(collapse(kChestPain));
  EXPECT_NEAR(m.precision, 0.926, 1e-3);
  EXPECT_NEAR(m.recall, 0.946, 1e-3);
  EXPECT_NEAR(m.f1, 0.936, 1e-3);
  EXPECT_NEAR(m.specificity, 0.918, 1e-3);
  EXPECT_NEAR(m.mcc, 0.865, 1e-3);
}

TEST(Metrics, DoeColumn) {
  const auto c = collapse(kDoe);
  EXPECT_EQ(c, (Confusion2{.tp = 137, .fp = 44, .tn = 261, .fn = 17}));
  const auto m = metrics(c);
  EXPECT_NEAR(m.precision, 0.757, 1e-3);
  EXPECT_NEAR(m.recall, 0.890, 1e-3);
  EXPECT_NEAR(m.f1, 0.818, 1e-3);
  EXPECT_NEAR(m.specificity, 0.856, 1e-3);
  EXPECT_NEAR(m.mcc, 0.720, 1e-3);
}

TEST(Metrics, PerfectDiagonal) {
  const auto m = metrics({.tp = 5, .fp = 0, .tn = 5, .fn = 0});
  EXPECT_DOUBLE_EQ(m.precision, 1);
  EXPECT_DOUBLE_EQ(m.recall, 1);
  EXPECT_DOUBLE_EQ(m.f1, 1);
  EXPECT_DOUBLE_EQ(m.specificity, 1);
  EXPECT_DOUBLE_EQ(m.mcc, 1);
}

TEST(Metrics, ZeroDenominatorsGiveZero) {
  const auto m = metrics({.tp = 0, .fp = 0, .tn = 7, .fn = 0});
  EXPECT_EQ(m.precision, 0);
  EXPECT_EQ(m.recall, 0);
  EXPECT_EQ(m.f1, 0);
  EXPECT_EQ(m.specificity, 1);
  EXPECT_EQ(m.mcc, 0);
  const auto z = metrics({});
  EXPECT_EQ(z.specificity, 0);
}

TEST(Metrics, RangesAndHarmonicMean) {
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    Confusion2 c{rng.uniform_index(30), rng.uniform_index(30), rng.uniform_index(30),
                 rng.uniform_index(30)};
    const auto m = metrics(c);
    for (double v : {m.precision, m.recall, m.f1, m.specificity}) {
      EXPECT_GE(v, 0);
      EXPECT_LE(v, 1);
    }
    EXPECT_GE(m.mcc, -1 - 1e-12);
    EXPECT_LE(m.mcc, 1 + 1e-12);
    if (m.precision + m.recall > 0)
      EXPECT_NEAR(m.f1, 2 * m.precision * m.recall / (m.precision + m.recall), 1e-12);
    const bool perfect = c.fp == 0 && c.fn == 0 && c.tp > 0 && c.tn > 0;
    EXPECT_EQ(std::abs(m.mcc - 1) < 1e-12, perfect);
  }
}

TEST(MulticlassMcc, DiagonalIsOne) {
  EXPECT_DOUBLE_EQ(multiclass_mcc(matrix({{{3, 0, 0}, {0, 5, 0}, {0, 0, 2}}})), 1.0);
}

TEST(MulticlassMcc, SinglePredictedRowIsZero) {
  EXPECT_EQ(multiclass_mcc(matrix({{{0, 0, 0}, {4, 9, 2}, {0, 0, 0}}})), 0.0);
  EXPECT_EQ(multiclass_mcc(Confusion3{}), 0.0);
}

TEST(MulticlassMcc, MatchesCorrelationOracle) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    Confusion3 m;
    for (auto& row : m.counts)
      for (auto& v : row) v = rng.uniform_index(15);
    EXPECT_NEAR(multiclass_mcc(m), mcc_by_correlation(m), 1e-12);
  }
  for (const auto& m : {kChestPain, kSob, kDoe})
    EXPECT_NEAR(multiclass_mcc(m), mcc_by_correlation(m), 1e-12);
}

TEST(Folds, TenByTen) {
  const auto plan = make_folds(10, 10, 1);
  ASSERT_EQ(plan.folds.size(), 10u);
  std::set<std::size_t> tests;
  for (const auto& f : plan.folds) {
    EXPECT_EQ(f.test.size(), 1u);
    EXPECT_EQ(f.validation.size(), 1u);
    EXPECT_EQ(f.train.size(), 8u);
    tests.insert(f.test.begin(), f.test.end());
  }
  EXPECT_EQ(tests.size(), 10u);
  EXPECT_EQ(*tests.rbegin(), 9u);
}

TEST(Folds, DoubleCoverageAt459) {
  const std::size_t n = 459;
  const auto plan = make_folds(n, 10, 459);
  std::vector<int> in_test(n), in_val(n);
  for (const auto& f : plan.folds) {
    EXPECT_TRUE(f.test.size() == 45 || f.test.size() == 46);
    std::vector<int> seen(n);
    for (auto i : f.test) ++in_test.at(i), ++seen[i];
    for (auto i : f.validation) ++in_val.at(i), ++seen[i];
    for (auto i : f.train) ++seen.at(i);
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    EXPECT_LE(std::abs(static_cast<long>(f.train.size()) - static_cast<long>(n * 8 / 10)), 2);
  }
  EXPECT_TRUE(std::all_of(in_test.begin(), in_test.end(), [](int s) { return s == 1; }));
  EXPECT_TRUE(std::all_of(in_val.begin(), in_val.end(), [](int s) { return s == 1; }));
}

TEST(Folds, Deterministic) {
  const auto a = make_folds(100, 10, 9);
  const auto b = make_folds(100, 10, 9);
  const auto c = make_folds(100, 10, 10);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(a.folds[i].test, b.folds[i].test);
    EXPECT_EQ(a.folds[i].validation, b.folds[i].validation);
    EXPECT_EQ(a.folds[i].train, b.folds[i].train);
  }
  bool differs = false;
  for (std::size_t i = 0; i < 10; ++i) differs |= a.folds[i].test != c.folds[i].test;
  EXPECT_TRUE(differs);
}

TEST(Folds, InvalidSizesThrow) {
  EXPECT_THROW(make_folds(5, 10, 1), ConfigError);
  EXPECT_THROW(make_folds(5, 1, 1), ConfigError);
}

FoldPredictions fold_with(std::vector<Label3> gold,
                          std::map<std::size_t, std::vector<Label3>> predicted) {
  return {std::move(gold), std::move(predicted)};
}

TEST(EpochCurve, IdenticalPredictionsGiveFlatCurve) {
  const std::vector<Label3> gold{Label3::Positive, Label3::Absent, Label3::Negative};
  const std::vector<Label3> pred{Label3::Positive, Label3::Positive, Label3::Negative};
  const std::vector<std::size_t> epochs{2, 4, 8};
  std::vector<FoldPredictions> folds{fold_with(gold, {{2, pred}, {4, pred}, {8, pred}}),
                                     fold_with(gold, {{2, pred}, {4, pred}, {8, pred}})};
  const auto curve = build_epoch_curve(folds, epochs);
  ASSERT_EQ(curve.points.size(), 3u);
  EXPECT_EQ(curve.points.at(2), curve.points.at(4));
  EXPECT_EQ(curve.points.at(4), curve.points.at(8));
  EXPECT_EQ(select_epochs(curve), 2u);
}

TEST(EpochCurve, SingleFoldIsThatFoldsMcc) {
  const std::vector<Label3> gold{Label3::Positive, Label3::Absent, Label3::Negative,
                                 Label3::Absent};
  const std::vector<Label3> p2{Label3::Positive, Label3::Negative, Label3::Negative,
                               Label3::Absent};
  const std::vector<std::size_t> epochs{2};
  std::vector<FoldPredictions> folds{fold_with(gold, {{2, p2}})};
  const auto curve = build_epoch_curve(folds, epochs);
  EXPECT_DOUBLE_EQ(curve.points.at(2), multiclass_mcc(accumulate_confusion3(p2, gold)));
}

TEST(EpochCurve, MatchesPooledRecomputation) {
  Rng rng(21);
  const std::vector<std::size_t> epochs{2, 4, 8, 16};
  std::vector<FoldPredictions> folds(5);
  for (auto& f : folds) {
    const std::size_t n = 8 + rng.uniform_index(5);
    for (std::size_t i = 0; i < n; ++i) f.gold.push_back(kAllLabels[rng.uniform_index(3)]);
    for (auto e : epochs)
      for (std::size_t i = 0; i < n; ++i)
        f.predicted[e].push_back(kAllLabels[rng.uniform_index(3)]);
  }
  const auto curve = build_epoch_curve(folds, epochs);
  for (auto e : epochs) {
    std::vector<Label3> pooled_pred, pooled_gold;
    for (const auto& f : folds) {
      pooled_gold.insert(pooled_gold.end(), f.gold.begin(), f.gold.end());
      pooled_pred.insert(pooled_pred.end(), f.predicted.at(e).begin(), f.predicted.at(e).end());
    }
    EXPECT_NEAR(curve.points.at(e),
                mcc_by_correlation(accumulate_confusion3(pooled_pred, pooled_gold)), 1e-12);
  }
}

TEST(EpochCurve, MissingEpochThrows) {
  const std::vector<Label3> gold{Label3::Positive};
  const std::vector<std::size_t> epochs{2, 4};
  std::vector<FoldPredictions> folds{fold_with(gold, {{2, gold}})};
  EXPECT_THROW(build_epoch_curve(folds, epochs), DataError);
}

TEST(SelectEpochs, PeakAt32) {
  EpochCurve c{{{2, 0.1}, {4, 0.3}, {8, 0.5}, {16, 0.6}, {32, 0.7}, {64, 0.65}, {128, 0.6}}};
  EXPECT_EQ(select_epochs(c), 32u);
}

TEST(SelectEpochs, TiesGoToFewerEpochs) {
  EpochCurve c{{{2, 0.1}, {4, 0.5}, {8, 0.5}, {16, 0.2}, {32, 0.1}, {64, 0}, {128, -0.1}}};
  EXPECT_EQ(select_epochs(c), 4u);
  EpochCurve flat{{{2, 0.3}, {4, 0.3}, {8, 0.3}, {16, 0.3}, {32, 0.3}, {64, 0.3}, {128, 0.3}}};
  EXPECT_EQ(select_epochs(flat), 2u);
}

TEST(SelectEpochs, InvariantUnderIncreasingTransform) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    EpochCurve c, g;
    for (std::size_t e : {2, 4, 8, 16, 32, 64, 128}) {
      const double v = std::round(rng.uniform(-1, 1) * 4) / 4;
      c.points[e] = v;
      g.points[e] = std::exp(3 * v) + 7;
    }
    EXPECT_EQ(select_epochs(c), select_epochs(g));
  }
}

TEST(ChiSquare, ExactMatchIsZeroAndOne) {
  const std::vector<std::size_t> observed{5, 4, 2, 1, 4, 3};
  const std::vector<double> rates{0.5, 0.4, 0.2, 0.1, 0.4, 0.3};
  const auto r = chi_square_truncation(observed, rates, 10);
  EXPECT_DOUBLE_EQ(r.statistic, 0);
  EXPECT_DOUBLE_EQ(r.p_value, 1);
  EXPECT_EQ(r.df, 5u);
}

TEST(ChiSquare, CriticalValueAtFiveDegrees) {
  const double oracle = survival_by_simpson(11.07, 5);
  EXPECT_NEAR(oracle, 0.05, 0.005);
  EXPECT_NEAR(chi_square_survival(11.07, 5), oracle, 1e-6);
}

TEST(ChiSquare, SurvivalMatchesSimpsonAcrossRange) {
  for (double df : {2.0, 3.0, 5.0, 8.0})
    for (double x : {0.5, 2.0, 5.0, 11.07, 20.0})
      EXPECT_NEAR(chi_square_survival(x, df), survival_by_simpson(x, df), 1e-6)
          << "df=" << df << " x=" << x;
}

TEST(ChiSquare, StatisticByHandAndZeroExpectedDropped) {
  const std::vector<std::size_t> observed{6, 2, 0, 1, 3, 0};
  const std::vector<double> rates{0.5, 0.25, 0.0, 0.125, 0.25, 0.0};
  const auto r = chi_square_truncation(observed, rates, 8);
  const double expected_stat = std::pow(6 - 4.0, 2) / 4 + std::pow(2 - 2.0, 2) / 2 +
                               std::pow(1 - 1.0, 2) / 1 + std::pow(3 - 2.0, 2) / 2;
  EXPECT_NEAR(r.statistic, expected_stat, 1e-12);
  EXPECT_EQ(r.df, 3u);
  EXPECT_NEAR(r.p_value, survival_by_simpson(expected_stat, 3), 1e-6);
}

}  // namespace
}  // namespace angina::eval
