#pragma once

#include <string>
#include <vector>

#include "cdl/matrix.hpp"

namespace cdl {

enum class TargetKind { kLabel, kConcentration };

/// Feature matrix paired with per-row target distributions. Target rows are
/// label distributions (width c) or concentration distributions (width c+1,
/// last column the background concentration).
struct Dataset {
  Matrix features;  // n x m
  Matrix targets;   // n x c or n x (c+1)
  TargetKind target_kind = TargetKind::kLabel;
  int label_count = 0;  // c
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;

  int n() const { return static_cast<int>(features.rows()); }
  int m() const { return static_cast<int>(features.cols()); }
  int target_width() const {
    return target_kind == TargetKind::kLabel ? label_count : label_count + 1;
  }
};

/// Checks dimensions and every target row's invariants; throws ValidationError.
void validate_dataset(const Dataset& ds);

}  // namespace cdl
