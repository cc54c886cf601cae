#pragma once

// Independent reference computations for the test suites. Nothing here
// calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "rtransfer/embedding.hpp"

namespace rtransfer::testing {

/// Full sort of every other row by (dot desc, row asc); first k kept.
inline std::vector<std::pair<std::size_t, double>> brute_force_topk(const EmbeddingStore& store, std::size_t query,
                                                                    std::size_t k) {
  std::vector<std::pair<std::size_t, double>> all;
  const auto q = store.row(query);
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (i == query) continue;
    const auto r = store.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < store.dim(); ++j) s += static_cast<double>(q[j]) * static_cast<double>(r[j]);
    all.emplace_back(i, s);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

/// Textbook cosine of two raw vectors.
inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

/// Eigenvalues (descending) of a symmetric matrix by cyclic Jacobi
/// rotations. Fine for the dim <= 20 matrices the PCA checks use.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

/// Sample covariance (divisor n - 1) of row vectors.
inline std::vector<std::vector<double>> sample_covariance(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size(), d = rows.front().size();
  std::vector<double> mean(d, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j] / static_cast<double>(n);
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& r : rows)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
  for (auto& row : cov)
    for (auto& v : row) v /= static_cast<double>(n - 1);
  return cov;
}

/// Upper-tail p-value of Pearson's chi-square statistic for observed
/// counts against expected probabilities (zero-probability cells must
/// have zero counts and are dropped).
inline double chi_square_p_value(const std::vector<std::size_t>& observed, const std::vector<double>& probs) {
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::size_t{0}));
  double stat = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (probs[i] <= 0.0) {
      if (observed[i] != 0) return 0.0;
      continue;
    }
    const double expected = total * probs[i];
    stat += (static_cast<double>(observed[i]) - expected) * (static_cast<double>(observed[i]) - expected) / expected;
    ++cells;
  }
  boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace rtransfer::testing
