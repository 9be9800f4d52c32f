#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "angina/eval.hpp"

namespace angina::testing {

// Pearson correlation of one-hot label vectors, built sample by sample.
inline double mcc_by_correlation(const eval::Confusion3& m) {
  std::vector<std::array<double, 3>> pred, gold;
  for (std::size_t p = 0; p < 3; ++p)
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t i = 0; i < m.counts[p][a]; ++i) {
        std::array<double, 3> x{}, y{};
        x[p] = 1;
        y[a] = 1;
        pred.push_back(x);
        gold.push_back(y);
      }
  const double n = static_cast<double>(pred.size());
  if (n == 0) return 0;
  std::array<double, 3> mx{}, my{};
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      mx[c] += pred[i][c] / n;
      my[c] += gold[i][c] / n;
    }
  double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      cxy += (pred[i][c] - mx[c]) * (gold[i][c] - my[c]);
      cxx += (pred[i][c] - mx[c]) * (pred[i][c] - mx[c]);
      cyy += (gold[i][c] - my[c]) * (gold[i][c] - my[c]);
    }
  if (cxx == 0 || cyy == 0) return 0;
  return cxy / std::sqrt(cxx * cyy);
}

inline double chi_square_pdf(double x, double k) {
  if (x <= 0) return 0;
  return std::exp((k / 2 - 1) * std::log(x) - x / 2 - (k / 2) * std::log(2.0) - std::lgamma(k / 2));
}

// 1 - CDF via composite Simpson's rule, integrating f(u^2) 2u over [0, sqrt(x)]
// so the integrand stays smooth at the origin.
inline double survival_by_simpson(double x, double k) {
  const int n = 20000;
  const double top = std::sqrt(x);
  const double h = top / n;
  auto g = [k](double u) { return chi_square_pdf(u * u, k) * 2 * u; };
  double s = g(0) + g(top);
  for (int i = 1; i < n; ++i) s += g(i * h) * (i % 2 ? 4 : 2);
  return 1 - s * h / 3;
}

}  // namespace angina::testing
