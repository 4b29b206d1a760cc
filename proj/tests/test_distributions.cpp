#include "cdl/distributions.hpp"

#include <limits>
#include <vector>

#include "cdl/errors.hpp"
#include "doctest.h"

using cdl::ConcentrationDistribution;
using cdl::DistributionKind;
using cdl::EvidenceVector;
using cdl::LabelDistribution;
using cdl::ValidationError;
using cdl::ValidationIssue;
using cdl::validate_distribution;

namespace {

std::vector<double> normalized(const std::vector<double>& raw) {
  const LabelDistribution d = cdl::normalize(raw);
  return {d.values().begin(), d.values().end()};
}

}  // namespace

TEST_CASE("normalize divides by the sum") {
  const std::vector<double> raw = {3.0, 4.8, 1.2, 2.1, 2.4, 1.5};
  const std::vector<double> want = {0.2, 0.32, 0.08, 0.14, 0.16, 0.1};
  const auto got = normalized(raw);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("normalize of equal entries is uniform") {
  const auto got = normalized({1.0, 1.0, 1.0, 1.0});
  for (const double v : got) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("normalize keeps zero entries at zero") {
  const auto got = normalized({0.0, 5.0});
  CHECK(got[0] == 0.0);
  CHECK(got[1] == 1.0);
}

TEST_CASE("normalize rejects an all-zero vector") {
  CHECK_THROWS_AS(cdl::normalize(std::vector<double>{0.0, 0.0}), ValidationError);
}

TEST_CASE("normalize names the index of a negative entry") {
  try {
    cdl::normalize(std::vector<double>{0.5, -0.1, 0.6});
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("index 1") != std::string::npos);
  }
}

TEST_CASE("normalize is idempotent") {
  const std::vector<double> raw = {0.7, 2.3, 0.1, 5.0};
  const auto once = normalized(raw);
  const auto twice = normalized(once);
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-12));
  }
}

TEST_CASE("normalize is scale invariant") {
  const std::vector<double> raw = {0.4, 1.9, 0.05, 3.2, 0.0};
  for (const double k : {1e-6, 0.5, 3.0, 1e8}) {
    std::vector<double> scaled = raw;
    for (double& v : scaled) v *= k;
    const auto a = normalized(raw);
    const auto b = normalized(scaled);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("validate_distribution accepts a simplex vector") {
  const std::vector<double> v = {0.5, 0.5};
  CHECK(validate_distribution(v, DistributionKind::kLabel).ok());
}

TEST_CASE("validate_distribution reports a sum violation with the sum") {
  const std::vector<double> v = {0.6, 0.6};
  const auto r = validate_distribution(v, DistributionKind::kLabel);
  REQUIRE_FALSE(r.ok());
  CHECK(r.issue->code == ValidationIssue::Code::kSumDeviation);
  CHECK(r.issue->value == doctest::Approx(1.2).epsilon(1e-12));
}

TEST_CASE("validate_distribution reports negativity with its index") {
  const std::vector<double> v = {0.5, -0.1, 0.6};
  const auto r = validate_distribution(v, DistributionKind::kLabel);
  REQUIRE_FALSE(r.ok());
  CHECK(r.issue->code == ValidationIssue::Code::kNegative);
  CHECK(r.issue->index == 1);
}

TEST_CASE("validate_distribution rejects vectors shorter than two") {
  const std::vector<double> v = {1.0};
  const auto r = validate_distribution(v, DistributionKind::kLabel);
  REQUIRE_FALSE(r.ok());
  CHECK(r.issue->code == ValidationIssue::Code::kTooShort);
}

TEST_CASE("validate_distribution flags non-finite and above-one entries") {
  const std::vector<double> inf = {std::numeric_limits<double>::infinity(), 0.5};
  CHECK(validate_distribution(inf, DistributionKind::kLabel).issue->code ==
        ValidationIssue::Code::kNonFinite);
  const std::vector<double> big = {1.5, -0.5};  // above-one hit before the sum check
  CHECK(validate_distribution(big, DistributionKind::kLabel).issue->code ==
        ValidationIssue::Code::kAboveOne);
}

TEST_CASE("label distribution constructor renormalizes tiny sum drift") {
  const LabelDistribution d({0.5, 0.5 + 5e-10});
  CHECK(d.values()[0] + d.values()[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("label distribution constructor rejects a real sum violation") {
  CHECK_THROWS_AS(LabelDistribution({0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(LabelDistribution({1.0}), ValidationError);
}

TEST_CASE("concentration distribution keeps label part and background consistent") {
  const ConcentrationDistribution cd({0.2, 0.3}, 0.5);
  CHECK(cd.background() == doctest::Approx(0.5).epsilon(1e-12));
  const auto full = cd.full();
  REQUIRE(full.size() == 3);
  double sum = 0.0;
  for (const double v : full) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("concentration distribution with zero background is a label distribution") {
  const ConcentrationDistribution cd({0.25, 0.75}, 0.0);
  CHECK_NOTHROW(LabelDistribution(cd.label_part()));
}

TEST_CASE("concentration distribution rejects mass that does not sum to one") {
  CHECK_THROWS_AS(ConcentrationDistribution({0.5, 0.5}, 0.5), ValidationError);
}

TEST_CASE("evidence vector accepts zero and rejects negatives") {
  const EvidenceVector e({0.0, 2.0, 5.0});
  CHECK(e.total() == doctest::Approx(7.0).epsilon(1e-15));
  CHECK_THROWS_AS(EvidenceVector({1.0, -0.1}), ValidationError);
  CHECK_THROWS_AS(EvidenceVector(std::vector<double>{}), ValidationError);
}
