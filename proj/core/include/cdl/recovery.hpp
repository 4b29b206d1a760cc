#pragma once

#include "cdl/distributions.hpp"

namespace cdl {

/// Concentration distribution recovered from evidence, together with the
/// apparent label distribution it implies.
struct RecoveryResult {
  ConcentrationDistribution cd;
  double evidence_total = 0.0;
  LabelDistribution apparent;  // b_i + mu/c, the implied E[p]
};

/// b_i = e_i / (sum e + c), mu = c / (sum e + c).
RecoveryResult recover(const EvidenceVector& e);

/// recover after rescaling alpha = e + 1 along its mean-preserving ray to the
/// boundary point min alpha = 1. The expected label distribution alpha/S is
/// constant on that ray, so a model fit to apparent targets determines the
/// evidence only up to it; this picks the one representative with a zero
/// minimum evidence and hence the largest background mass.
RecoveryResult recover_anchored(const EvidenceVector& e);

/// E[p_i] = b_i + mu/c under the uniform-spread assumption.
LabelDistribution apparent_expectation(const ConcentrationDistribution& cd);

/// 1 + 1/(4c(c+1)): the excess-risk constant; strictly decreasing in c.
double bound_constant(int label_count);

}  // namespace cdl
