#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cdl {

/// Allowed deviation of a distribution's sum from 1 before rejection.
/// Rows inside that band are divided by their actual sum on construction,
/// so downstream math always sees exact simplex vectors.
inline constexpr double kSumTolerance = 1e-9;

enum class DistributionKind { kLabel, kConcentration };

struct ValidationIssue {
  enum class Code { kTooShort, kNonFinite, kNegative, kAboveOne, kSumDeviation };
  Code code;
  std::size_t index = 0;  // offending entry for per-entry codes
  double value = 0.0;     // the entry, or the observed sum
  std::string message() const;
};

struct ValidationResult {
  std::optional<ValidationIssue> issue;
  bool ok() const noexcept { return !issue.has_value(); }
  std::string message() const { return issue ? issue->message() : "ok"; }
};

/// First violated invariant of a label or concentration distribution, or ok.
/// Violations are reported, never thrown.
ValidationResult validate_distribution(std::span<const double> v, DistributionKind kind);

/// Length-c simplex vector: entries in [0,1], summing to 1.
class LabelDistribution {
 public:
  /// Validates (c >= 2, non-negative, sum within kSumTolerance of 1) and
  /// renormalizes exactly. Throws ValidationError otherwise.
  explicit LabelDistribution(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }

  bool operator==(const LabelDistribution&) const = default;

 private:
  std::vector<double> values_;
};

/// Length-(c+1) simplex vector split as [label_part..., background]:
/// the real label distribution b plus the background concentration mu.
class ConcentrationDistribution {
 public:
  ConcentrationDistribution(std::vector<double> label_part, double background);

  std::size_t label_count() const noexcept { return label_part_.size(); }
  const std::vector<double>& label_part() const noexcept { return label_part_; }
  double background() const noexcept { return background_; }

  /// Full [b..., mu] vector of width c+1.
  std::vector<double> full() const;

  bool operator==(const ConcentrationDistribution&) const = default;

 private:
  std::vector<double> label_part_;
  double background_ = 0.0;
};

/// Length-c non-negative evidence vector (network output).
class EvidenceVector {
 public:
  explicit EvidenceVector(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  double total() const noexcept;

  bool operator==(const EvidenceVector&) const = default;

 private:
  std::vector<double> values_;
};

/// Divide a non-negative vector by its sum. Errors on negative entries
/// (naming the index) and on all-zero input.
LabelDistribution normalize(std::span<const double> raw);

}  // namespace cdl
