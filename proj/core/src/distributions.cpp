#include "cdl/distributions.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "cdl/errors.hpp"

namespace cdl {

namespace {

std::string format_double(double v) {
  std::ostringstream oss;
  oss << v;
  return oss.str();
}

void renormalize(std::vector<double>& v, double sum) {
  for (double& x : v) x /= sum;
}

}  // namespace

std::string ValidationIssue::message() const {
  switch (code) {
    case Code::kTooShort:
      return "too short: need at least " + format_double(value) + " entries";
    case Code::kNonFinite:
      return "non-finite entry at index " + std::to_string(index);
    case Code::kNegative:
      return "negativity at index " + std::to_string(index) + " (" + format_double(value) + ")";
    case Code::kAboveOne:
      return "entry above 1 at index " + std::to_string(index) + " (" + format_double(value) + ")";
    case Code::kSumDeviation:
      return "sum violation (" + format_double(value) + ")";
  }
  return "unknown";
}

ValidationResult validate_distribution(std::span<const double> v, DistributionKind kind) {
  using Code = ValidationIssue::Code;
  (void)kind;  // label: c classes; concentration: c labels + background
  if (v.size() < 2) {
    return {ValidationIssue{Code::kTooShort, 0, 2.0}};
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return {ValidationIssue{Code::kNonFinite, i, v[i]}};
    if (v[i] < 0.0) return {ValidationIssue{Code::kNegative, i, v[i]}};
    if (v[i] > 1.0 + kSumTolerance) return {ValidationIssue{Code::kAboveOne, i, v[i]}};
    sum += v[i];
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    return {ValidationIssue{Code::kSumDeviation, 0, sum}};
  }
  return {};
}

LabelDistribution::LabelDistribution(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw ValidationError("label distribution needs at least 2 classes, got " +
                          std::to_string(values_.size()));
  }
  const auto check = validate_distribution(values_, DistributionKind::kLabel);
  if (!check.ok()) {
    throw ValidationError("invalid label distribution: " + check.message());
  }
  renormalize(values_, std::accumulate(values_.begin(), values_.end(), 0.0));
}

ConcentrationDistribution::ConcentrationDistribution(std::vector<double> label_part,
                                                     double background)
    : label_part_(std::move(label_part)), background_(background) {
  if (label_part_.empty()) {
    throw ValidationError("concentration distribution needs at least 1 label class");
  }
  std::vector<double> whole = label_part_;
  whole.push_back(background_);
  const auto check = validate_distribution(whole, DistributionKind::kConcentration);
  if (!check.ok()) {
    throw ValidationError("invalid concentration distribution: " + check.message());
  }
  const double sum = std::accumulate(whole.begin(), whole.end(), 0.0);
  renormalize(label_part_, sum);
  background_ /= sum;
}

std::vector<double> ConcentrationDistribution::full() const {
  std::vector<double> out = label_part_;
  out.push_back(background_);
  return out;
}

EvidenceVector::EvidenceVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw ValidationError("evidence vector must not be empty");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw ValidationError("evidence must be non-negative and finite; index " +
                            std::to_string(i) + " is " + format_double(values_[i]));
    }
  }
}

double EvidenceVector::total() const noexcept {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

LabelDistribution normalize(std::span<const double> raw) {
  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i]) || raw[i] < 0.0) {
      throw ValidationError("normalize: negative or non-finite entry at index " +
                            std::to_string(i) + " (" + format_double(raw[i]) + ")");
    }
    sum += raw[i];
  }
  if (sum <= 0.0) {
    throw ValidationError("normalize: input sums to zero");
  }
  std::vector<double> out(raw.begin(), raw.end());
  for (double& x : out) x /= sum;
  return LabelDistribution(std::move(out));
}

}  // namespace cdl
