#include "cdl/metrics.hpp"

#include <cmath>
#include <vector>

#include "cdl/errors.hpp"
#include "cdl/rng.hpp"
#include "doctest.h"

using cdl::Direction;
using cdl::Matrix;
using cdl::MetricReport;
using cdl::RandomStream;
using cdl::RankTable;

namespace {

std::vector<double> random_simplex_vec(RandomStream& rng, int c) {
  std::vector<double> v(c);
  double sum = 0.0;
  for (double& x : v) {
    x = rng.gamma(1.0);
    sum += x;
  }
  for (double& x : v) x /= sum;
  return v;
}

}  // namespace

TEST_CASE("identical distributions score zero distance and full similarity") {
  const std::vector<double> d = {0.3, 0.7};
  const MetricReport r = cdl::eval_metrics(d, d);
  CHECK(r.chebyshev == 0.0);
  CHECK(r.clark == 0.0);
  CHECK(r.kl == 0.0);
  CHECK(r.cosine == 1.0);
}

TEST_CASE("hand-checked values on a skewed pair") {
  const std::vector<double> truth = {0.2, 0.8};
  const std::vector<double> pred = {0.5, 0.5};
  const MetricReport r = cdl::eval_metrics(truth, pred);
  CHECK(std::abs(r.chebyshev - 0.3) <= 1e-4);
  CHECK(std::abs(r.clark - 0.48675) <= 1e-4);
  CHECK(std::abs(r.kl - 0.19274) <= 1e-4);
  CHECK(std::abs(r.cosine - 0.85749) <= 1e-4);
}

TEST_CASE("hand-checked values with a zero in the truth") {
  const std::vector<double> truth = {1.0, 0.0};
  const std::vector<double> pred = {0.5, 0.5};
  const MetricReport r = cdl::eval_metrics(truth, pred);
  CHECK(std::abs(r.chebyshev - 0.5) <= 1e-4);
  CHECK(std::abs(r.clark - 1.05409) <= 1e-4);
  CHECK(std::abs(r.kl - 0.69315) <= 1e-4);
  CHECK(std::abs(r.cosine - 0.70711) <= 1e-4);
}

TEST_CASE("zero prediction entries are clamped instead of dividing by zero") {
  const std::vector<double> truth = {0.5, 0.5};
  const std::vector<double> pred = {1.0, 0.0};
  const MetricReport r = cdl::eval_metrics(truth, pred);
  CHECK(std::isfinite(r.kl));
  CHECK(r.kl > 1.0);  // the clamp makes the missing class very expensive
}

TEST_CASE("classes absent on both sides do not contribute") {
  const std::vector<double> truth = {0.5, 0.5, 0.0};
  const std::vector<double> pred = {0.4, 0.6, 0.0};
  const MetricReport with_zero = cdl::eval_metrics(truth, pred);
  const std::vector<double> t2 = {0.5, 0.5};
  const std::vector<double> p2 = {0.4, 0.6};
  const MetricReport without = cdl::eval_metrics(t2, p2);
  CHECK(with_zero.clark == doctest::Approx(without.clark).epsilon(1e-12));
  CHECK(with_zero.kl == doctest::Approx(without.kl).epsilon(1e-12));
}

TEST_CASE("distance metrics are symmetric and divergence is not") {
  const std::vector<double> a = {1.0, 0.0};
  const std::vector<double> b = {0.5, 0.5};
  const MetricReport ab = cdl::eval_metrics(a, b);
  const MetricReport ba = cdl::eval_metrics(b, a);
  CHECK(ab.chebyshev == doctest::Approx(ba.chebyshev).epsilon(1e-12));
  CHECK(ab.clark == doctest::Approx(ba.clark).epsilon(1e-12));
  CHECK(ab.cosine == doctest::Approx(ba.cosine).epsilon(1e-12));
  CHECK(std::abs(ab.kl - ba.kl) > 1.0);
}

TEST_CASE("divergence stays non-negative and chebyshev bounded by one") {
  RandomStream rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const int c = 2 + static_cast<int>(rng.below(7));
    const auto t = random_simplex_vec(rng, c);
    const auto p = random_simplex_vec(rng, c);
    const MetricReport r = cdl::eval_metrics(t, p);
    CHECK(r.kl >= 0.0);
    CHECK(r.chebyshev <= 1.0);
    CHECK(r.chebyshev >= 0.0);
    CHECK(r.clark >= 0.0);
  }
}

TEST_CASE("metrics reject mismatched widths") {
  const std::vector<double> a = {0.5, 0.5};
  const std::vector<double> b = {0.3, 0.3, 0.4};
  CHECK_THROWS_AS(cdl::eval_metrics(a, b), cdl::ValidationError);
}

TEST_CASE("ranking a single row") {
  const Matrix row1 = Matrix::from_rows({{0.1, 0.2, 0.3}});
  const RankTable r1 = cdl::average_ranks(row1, Direction::kLowerBetter);
  CHECK(r1.ranks(0, 0) == 1.0);
  CHECK(r1.ranks(0, 1) == 2.0);
  CHECK(r1.ranks(0, 2) == 3.0);

  const Matrix tied = Matrix::from_rows({{0.1, 0.1, 0.3}});
  const RankTable r2 = cdl::average_ranks(tied, Direction::kLowerBetter);
  CHECK(r2.ranks(0, 0) == 1.5);
  CHECK(r2.ranks(0, 1) == 1.5);
  CHECK(r2.ranks(0, 2) == 3.0);

  const Matrix best_high = Matrix::from_rows({{0.9, 0.5, 0.7}});
  const RankTable r3 = cdl::average_ranks(best_high, Direction::kHigherBetter);
  CHECK(r3.ranks(0, 0) == 1.0);
  CHECK(r3.ranks(0, 1) == 3.0);
  CHECK(r3.ranks(0, 2) == 2.0);
}

TEST_CASE("rank rows always sum to the triangular number") {
  RandomStream rng(31);
  const int N = 10, k = 7;
  Matrix scores(N, k);
  for (double& v : scores.data()) v = 0.1 * static_cast<double>(rng.below(5));  // force ties
  const RankTable table = cdl::average_ranks(scores, Direction::kLowerBetter);
  const double want = k * (k + 1) / 2.0;
  for (int r = 0; r < N; ++r) {
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += table.ranks(r, j);
    CHECK(sum == doctest::Approx(want).epsilon(1e-9));
  }
  double mean_sum = 0.0;
  for (const double v : table.average_ranks) mean_sum += v;
  CHECK(mean_sum == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("rank aggregation matches published statistic values") {
  const std::vector<double> cheb_ranks = {1.67, 5.17, 4.67, 3.42, 3.92, 4.25, 4.92};
  CHECK(std::abs(cdl::friedman_statistic(cheb_ranks, 12, 7) - 22.26) <= 0.05);

  const std::vector<double> clark_ranks = {1.00, 5.83, 5.75, 3.67, 3.67, 4.00, 4.08};
  CHECK(std::abs(cdl::friedman_statistic(clark_ranks, 12, 7) - 40.21) <= 0.05);
}

TEST_CASE("equal ranks give a zero statistic") {
  const std::vector<double> flat(7, 4.0);  // (k+1)/2 for k=7
  CHECK(cdl::friedman_statistic(flat, 12, 7) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("the statistic is invariant to permuting methods") {
  const std::vector<double> ranks = {1.67, 5.17, 4.67, 3.42, 3.92, 4.25, 4.92};
  std::vector<double> permuted = {4.92, 3.42, 1.67, 4.25, 5.17, 3.92, 4.67};
  CHECK(cdl::friedman_statistic(ranks, 12, 7) ==
        doctest::Approx(cdl::friedman_statistic(permuted, 12, 7)).epsilon(1e-12));
}

TEST_CASE("the f-corrected statistic follows its defining identity") {
  const double chi = 22.2645;
  const int N = 12, k = 7;
  const double f = cdl::iman_davenport_f(chi, N, k);
  CHECK(f == doctest::Approx((N - 1) * chi / (N * (k - 1) - chi)).epsilon(1e-12));
  CHECK(std::abs(f - 4.9242) <= 1e-3);
}

TEST_CASE("implausible rank vectors are rejected") {
  const std::vector<double> bad = {1.0, 1.0, 1.0};  // sums to 3, not 6
  CHECK_THROWS_AS(cdl::friedman_statistic(bad, 5, 3), cdl::ValidationError);
}
