#include "cdl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cdl/errors.hpp"

namespace cdl {

namespace {
constexpr double kLogClamp = 1e-12;
}

MetricReport eval_metrics(std::span<const double> truth, std::span<const double> prediction) {
  if (truth.size() != prediction.size()) {
    throw ValidationError("eval_metrics: width mismatch (" + std::to_string(truth.size()) +
                          " vs " + std::to_string(prediction.size()) + ")");
  }
  if (truth.size() < 2) {
    throw ValidationError("eval_metrics: need width >= 2");
  }

  MetricReport r;
  double dot = 0.0, nt = 0.0, np = 0.0, clark2 = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const double d = truth[j];
    const double d_hat = prediction[j];
    r.chebyshev = std::max(r.chebyshev, std::abs(d - d_hat));
    const double denom = d + d_hat;
    if (denom > 0.0) {
      const double q = (d - d_hat) / denom;
      clark2 += q * q;
    }
    if (d > 0.0) {
      r.kl += d * std::log(d / std::max(d_hat, kLogClamp));
    }
    dot += d * d_hat;
    nt += d * d;
    np += d_hat * d_hat;
  }
  r.clark = std::sqrt(clark2);
  // sqrt of the product, not the product of sqrts: for truth == prediction
  // this divides dot by itself exactly, making the identity score exactly 1.
  r.cosine = dot / std::sqrt(nt * np);
  return r;
}

RankTable average_ranks(const Matrix& scores, Direction direction,
                        std::vector<std::string> methods,
                        std::vector<std::string> datasets) {
  const std::size_t n = scores.rows();
  const std::size_t k = scores.cols();
  if (n < 1 || k < 2) {
    throw ValidationError("average_ranks: need N >= 1 rows and k >= 2 columns");
  }
  for (double v : scores.data()) {
    if (!std::isfinite(v)) throw ValidationError("average_ranks: non-finite score");
  }

  RankTable table;
  table.methods = std::move(methods);
  table.datasets = std::move(datasets);
  table.ranks = Matrix(n, k);
  table.average_ranks.assign(k, 0.0);

  std::vector<std::size_t> order(k);
  for (std::size_t row = 0; row < n; ++row) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto span = scores.row(row);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return direction == Direction::kLowerBetter ? span[a] < span[b] : span[a] > span[b];
    });
    // ties share the mean of the positions they occupy
    std::size_t i = 0;
    while (i < k) {
      std::size_t j = i;
      while (j + 1 < k && span[order[j + 1]] == span[order[i]]) ++j;
      const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) table.ranks(row, order[t]) = shared;
      i = j + 1;
    }
    for (std::size_t col = 0; col < k; ++col) {
      table.average_ranks[col] += table.ranks(row, col);
    }
  }
  for (double& v : table.average_ranks) v /= static_cast<double>(n);
  return table;
}

double friedman_statistic(std::span<const double> avg_ranks, int dataset_count,
                          int method_count) {
  const double k = static_cast<double>(method_count);
  const double n = static_cast<double>(dataset_count);
  if (method_count < 2 || dataset_count < 2) {
    throw ValidationError("friedman_statistic: need N >= 2 and k >= 2");
  }
  if (static_cast<int>(avg_ranks.size()) != method_count) {
    throw ValidationError("friedman_statistic: rank vector length != k");
  }
  double sum = 0.0, sum_sq = 0.0;
  for (double r : avg_ranks) {
    if (!std::isfinite(r)) throw ValidationError("friedman_statistic: non-finite rank");
    sum += r;
    sum_sq += r * r;
  }
  // 0.5 slack absorbs two-decimal rounding of published rank tables
  if (std::abs(sum - k * (k + 1.0) / 2.0) > 0.5) {
    throw ValidationError("friedman_statistic: ranks sum to " + std::to_string(sum) +
                          ", expected ~" + std::to_string(k * (k + 1.0) / 2.0));
  }
  return 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
}

double iman_davenport_f(double friedman_chi2, int dataset_count, int method_count) {
  const double n = static_cast<double>(dataset_count);
  const double k = static_cast<double>(method_count);
  return (n - 1.0) * friedman_chi2 / (n * (k - 1.0) - friedman_chi2);
}

}  // namespace cdl
