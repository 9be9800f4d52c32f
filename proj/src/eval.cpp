#include "angina/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "angina/error.hpp"
#include "angina/rng.hpp"

namespace angina::eval {

std::size_t Confusion3::total() const {
  std::size_t sum = 0;
  for (const auto& row : counts) sum += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return sum;
}

Confusion3& Confusion3::operator+=(const Confusion3& other) {
  for (std::size_t p = 0; p < kNumLabels; ++p)
    for (std::size_t a = 0; a < kNumLabels; ++a) counts[p][a] += other.counts[p][a];
  return *this;
}

Confusion3 accumulate_confusion3(std::span<const Label3> predicted, std::span<const Label3> gold) {
  if (predicted.size() != gold.size())
    throw DataError("prediction count " + std::to_string(predicted.size()) +
                    " does not match gold count " + std::to_string(gold.size()));
  Confusion3 m;
  for (std::size_t i = 0; i < gold.size(); ++i) ++m.at(predicted[i], gold[i]);
  return m;
}

Confusion2 collapse(const Confusion3& m) {
  Confusion2 c;
  for (Label3 p : kAllLabels) {
    for (Label3 a : kAllLabels) {
      const std::size_t n = m.at(p, a);
      const bool pred_pos = p == Label3::Positive;
      const bool gold_pos = a == Label3::Positive;
      if (pred_pos && gold_pos) c.tp += n;
      else if (pred_pos) c.fp += n;
      else if (gold_pos) c.fn += n;
      else c.tn += n;
    }
  }
  return c;
}

namespace {
double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }
}  // namespace

Metrics metrics(const Confusion2& c) {
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  Metrics m;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.specificity = ratio(tn, tn + fp);
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  m.mcc = ratio(tp * tn - fp * fn, std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)));
  return m;
}

double multiclass_mcc(const Confusion3& m) {
  double s = 0.0, correct = 0.0, pt = 0.0, pp = 0.0, tt = 0.0;
  std::array<double, kNumLabels> pred{}, actual{};
  for (std::size_t p = 0; p < kNumLabels; ++p) {
    for (std::size_t a = 0; a < kNumLabels; ++a) {
      const double n = static_cast<double>(m.counts[p][a]);
      pred[p] += n;
      actual[a] += n;
      s += n;
      if (p == a) correct += n;
    }
  }
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    pt += pred[k] * actual[k];
    pp += pred[k] * pred[k];
    tt += actual[k] * actual[k];
  }
  return ratio(correct * s - pt, std::sqrt((s * s - pp) * (s * s - tt)));
}

FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("fold count must be at least 2");
  if (n < k) throw ConfigError("cannot split " + std::to_string(n) + " items into " +
                               std::to_string(k) + " folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span(perm));

  std::vector<std::vector<std::size_t>> blocks(k);
  std::size_t offset = 0;
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t size = n / k + (b < n % k ? 1 : 0);
    blocks[b].assign(perm.begin() + static_cast<std::ptrdiff_t>(offset),
                     perm.begin() + static_cast<std::ptrdiff_t>(offset + size));
    std::sort(blocks[b].begin(), blocks[b].end());
    offset += size;
  }

  FoldPlan plan;
  plan.k = k;
  for (std::size_t i = 0; i < k; ++i) {
    Fold fold;
    fold.test = blocks[i];
    fold.validation = blocks[(i + 1) % k];
    for (std::size_t b = 0; b < k; ++b)
      if (b != i && b != (i + 1) % k)
        fold.train.insert(fold.train.end(), blocks[b].begin(), blocks[b].end());
    std::sort(fold.train.begin(), fold.train.end());
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

EpochCurve build_epoch_curve(std::span<const FoldPredictions> folds,
                             std::span<const std::size_t> epochs) {
  if (folds.empty()) throw DataError("no fold predictions to build an epoch curve from");
  EpochCurve curve;
  for (std::size_t e : epochs) {
    Confusion3 pooled;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto it = folds[f].predicted.find(e);
      if (it == folds[f].predicted.end())
        throw DataError("fold " + std::to_string(f) + " has no predictions at " +
                        std::to_string(e) + " epochs");
      pooled += accumulate_confusion3(it->second, folds[f].gold);
    }
    curve.points[e] = multiclass_mcc(pooled);
  }
  return curve;
}

std::size_t select_epochs(const EpochCurve& curve) {
  if (curve.points.empty()) throw DataError("empty epoch curve");
  auto best = curve.points.begin();
  for (auto it = curve.points.begin(); it != curve.points.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

ChiSquareResult chi_square_truncation(std::span<const std::size_t> truncated_positive_counts,
                                      std::span<const double> overall_positive_rates,
                                      std::size_t truncated_n) {
  if (truncated_positive_counts.size() != overall_positive_rates.size())
    throw DataError("observed and rate vectors differ in length");
  if (truncated_n == 0) throw DataError("chi-square check needs at least one truncated note");
  ChiSquareResult result;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < overall_positive_rates.size(); ++i) {
    const double rate = overall_positive_rates[i];
    if (!(rate >= 0.0 && rate <= 1.0)) throw DataError("positive rates must lie in [0, 1]");
    const double expected = rate * static_cast<double>(truncated_n);
    if (expected == 0.0) continue;
    const double diff = static_cast<double>(truncated_positive_counts[i]) - expected;
    result.statistic += diff * diff / expected;
    ++cells;
  }
  if (cells < 2) return {0.0, 1.0, 0};
  result.df = cells - 1;
  result.p_value = chi_square_survival(result.statistic, static_cast<double>(result.df));
  return result;
}

double chi_square_survival(double statistic, double df) {
  if (!(df > 0.0)) throw DataError("chi-square degrees of freedom must be positive");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, statistic / 2.0);
}

}  // namespace angina::eval
