#include "cdl/recovery.hpp"

#include <algorithm>

#include <string>
#include <vector>

#include "cdl/errors.hpp"

namespace cdl {

RecoveryResult recover(const EvidenceVector& e) {
  if (e.size() < 2) {
    throw ValidationError("recover: evidence needs at least 2 classes");
  }
  const double c = static_cast<double>(e.size());
  const double evidence_total = e.total();
  const double denom = evidence_total + c;

  std::vector<double> label_part(e.size());
  std::vector<double> apparent(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    label_part[i] = e[i] / denom;
    apparent[i] = (e[i] + 1.0) / denom;
  }
  const double background = c / denom;

  return RecoveryResult{
      ConcentrationDistribution(std::move(label_part), background),
      evidence_total,
      LabelDistribution(std::move(apparent)),
  };
}

RecoveryResult recover_anchored(const EvidenceVector& e) {
  if (e.size() < 2) {
    throw ValidationError("recover_anchored: evidence needs at least 2 classes");
  }
  double alpha_min = e[0] + 1.0;
  for (std::size_t i = 1; i < e.size(); ++i) {
    alpha_min = std::min(alpha_min, e[i] + 1.0);
  }
  std::vector<double> anchored(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    anchored[i] = (e[i] + 1.0) / alpha_min - 1.0;
  }
  return recover(EvidenceVector(std::move(anchored)));
}

LabelDistribution apparent_expectation(const ConcentrationDistribution& cd) {
  const double spread = cd.background() / static_cast<double>(cd.label_count());
  std::vector<double> out(cd.label_part());
  for (double& x : out) x += spread;
  return LabelDistribution(std::move(out));
}

double bound_constant(int label_count) {
  if (label_count < 1) {
    throw ValidationError("bound_constant: label count must be >= 1, got " +
                          std::to_string(label_count));
  }
  const double c = static_cast<double>(label_count);
  return 1.0 + 1.0 / (4.0 * c * (c + 1.0));
}

}  // namespace cdl
