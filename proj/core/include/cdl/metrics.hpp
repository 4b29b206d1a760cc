#pragma once

#include <span>
#include <string>
#include <vector>

#include "cdl/matrix.hpp"

namespace cdl {

/// The four per-instance evaluation measures: three distances (lower is
/// better) and one similarity (higher is better).
struct MetricReport {
  double chebyshev = 0.0;
  double clark = 0.0;
  double kl = 0.0;
  double cosine = 0.0;
};

/// Compare a ground-truth distribution against a prediction of equal width.
/// KL uses the truth as the left argument; terms with truth 0 contribute 0
/// and prediction entries are clamped to 1e-12 before the log. Clark terms
/// with a zero denominator contribute 0.
MetricReport eval_metrics(std::span<const double> truth, std::span<const double> prediction);

enum class Direction { kLowerBetter, kHigherBetter };

/// Per-dataset ranks of k methods (ties share the mean of their positions)
/// plus the column means.
struct RankTable {
  std::vector<std::string> methods;   // k names
  std::vector<std::string> datasets;  // N names
  Matrix ranks;                       // N x k
  std::vector<double> average_ranks;  // length k
};

/// Rank each row of an N x k score matrix.
RankTable average_ranks(const Matrix& scores, Direction direction,
                        std::vector<std::string> methods = {},
                        std::vector<std::string> datasets = {});

/// Friedman chi-square over average ranks:
/// 12N/(k(k+1)) * (sum_j R_j^2 - k(k+1)^2/4).
double friedman_statistic(std::span<const double> avg_ranks, int dataset_count,
                          int method_count);

/// Iman-Davenport F correction of the Friedman chi-square.
double iman_davenport_f(double friedman_chi2, int dataset_count, int method_count);

}  // namespace cdl
