#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cdl/distributions.hpp"
#include "cdl/rng.hpp"

namespace cdl {

/// Dirichlet parameter vector with its sum S cached.
class DirichletParams {
 public:
  /// Every alpha entry must be strictly positive.
  explicit DirichletParams(std::vector<double> alpha);

  /// alpha = e + 1 entrywise, so every entry is >= 1.
  static DirichletParams from_evidence(const EvidenceVector& e);

  std::size_t size() const noexcept { return alpha_.size(); }
  double operator[](std::size_t i) const { return alpha_[i]; }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  double sum() const noexcept { return sum_; }

 private:
  std::vector<double> alpha_;
  double sum_ = 0.0;
};

/// total = err + var, the exact Dirichlet expectation of ||y - p||^2.
struct LossBreakdown {
  double total = 0.0;
  double err = 0.0;  // squared error of the mean prediction
  double var = 0.0;  // summed Dirichlet variance
};

/// E[p_i] = alpha_i / S.
LabelDistribution dirichlet_mean(const DirichletParams& params);

/// Var[p_i] = alpha_i (S - alpha_i) / (S^2 (S + 1)).
std::vector<double> dirichlet_variance(const DirichletParams& params);

/// Draw `count` simplex points via per-coordinate Gamma(alpha_i, 1) draws.
std::vector<LabelDistribution> dirichlet_sample(const DirichletParams& params,
                                                RandomStream& rng, std::size_t count);

/// Adjusted MSE: E_{p ~ Dir(alpha)} ||y - p||^2 in closed form.
LossBreakdown amse_loss(const DirichletParams& params, const LabelDistribution& target);

/// dL/dalpha of amse_loss, componentwise.
std::vector<double> amse_gradient(const DirichletParams& params,
                                  const LabelDistribution& target);

/// Plain squared Euclidean distance ||y - p||^2.
double mse_loss(const LabelDistribution& prediction, const LabelDistribution& target);

/// log B(alpha) via log-Gamma; used by density checks in tests only.
double log_beta(std::span<const double> alpha);

}  // namespace cdl
