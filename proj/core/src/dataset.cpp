#include "cdl/dataset.hpp"

#include <string>

#include "cdl/distributions.hpp"
#include "cdl/errors.hpp"

namespace cdl {

void validate_dataset(const Dataset& ds) {
  if (ds.features.rows() < 1 || ds.features.cols() < 1) {
    throw ValidationError("dataset needs n >= 1 and m >= 1, got n=" +
                          std::to_string(ds.features.rows()) +
                          " m=" + std::to_string(ds.features.cols()));
  }
  if (ds.targets.rows() != ds.features.rows()) {
    throw ValidationError("feature/target row count mismatch: " +
                          std::to_string(ds.features.rows()) + " vs " +
                          std::to_string(ds.targets.rows()));
  }
  if (static_cast<int>(ds.targets.cols()) != ds.target_width()) {
    throw ValidationError("target width " + std::to_string(ds.targets.cols()) +
                          " does not match declared c=" + std::to_string(ds.label_count));
  }
  const DistributionKind kind = ds.target_kind == TargetKind::kLabel
                                    ? DistributionKind::kLabel
                                    : DistributionKind::kConcentration;
  for (std::size_t r = 0; r < ds.targets.rows(); ++r) {
    const auto check = validate_distribution(ds.targets.row(r), kind);
    if (!check.ok()) {
      throw ValidationError("target row " + std::to_string(r) + ": " + check.message());
    }
  }
}

}  // namespace cdl
