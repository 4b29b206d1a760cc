#include "cdl/dirichlet.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "cdl/errors.hpp"

namespace cdl {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ValidationError(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

DirichletParams::DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 2) {
    throw ValidationError("dirichlet parameters need at least 2 entries");
  }
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    if (!std::isfinite(alpha_[i]) || alpha_[i] <= 0.0) {
      throw ValidationError("dirichlet alpha must be positive and finite; index " +
                            std::to_string(i) + " is " + std::to_string(alpha_[i]));
    }
  }
  sum_ = std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
}

DirichletParams DirichletParams::from_evidence(const EvidenceVector& e) {
  std::vector<double> alpha(e.values());
  for (double& a : alpha) a += 1.0;
  return DirichletParams(std::move(alpha));
}

LabelDistribution dirichlet_mean(const DirichletParams& params) {
  std::vector<double> mean(params.alpha());
  for (double& a : mean) a /= params.sum();
  return LabelDistribution(std::move(mean));
}

std::vector<double> dirichlet_variance(const DirichletParams& params) {
  const double s = params.sum();
  std::vector<double> var(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    var[i] = params[i] * (s - params[i]) / (s * s * (s + 1.0));
  }
  return var;
}

std::vector<LabelDistribution> dirichlet_sample(const DirichletParams& params,
                                                RandomStream& rng, std::size_t count) {
  if (count < 1) throw ValidationError("dirichlet_sample: count must be >= 1");
  std::vector<LabelDistribution> out;
  out.reserve(count);
  std::vector<double> draw(params.size());
  for (std::size_t s = 0; s < count; ++s) {
    double total = 0.0;
    do {
      total = 0.0;
      for (std::size_t i = 0; i < params.size(); ++i) {
        draw[i] = rng.gamma(params[i]);
        total += draw[i];
      }
    } while (total == 0.0);
    std::vector<double> point(draw);
    for (double& x : point) x /= total;
    out.emplace_back(std::move(point));
  }
  return out;
}

LossBreakdown amse_loss(const DirichletParams& params, const LabelDistribution& target) {
  require_same_size(params.size(), target.size(), "amse_loss");
  const double s = params.sum();
  LossBreakdown loss;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double p_hat = params[i] / s;
    const double d = target[i] - p_hat;
    loss.err += d * d;
    loss.var += p_hat * (1.0 - p_hat) / (s + 1.0);
  }
  loss.total = loss.err + loss.var;
  return loss;
}

std::vector<double> amse_gradient(const DirichletParams& params,
                                  const LabelDistribution& target) {
  require_same_size(params.size(), target.size(), "amse_gradient");
  const double s = params.sum();
  const std::size_t c = params.size();

  // err term: d/da_j sum_i (y_i - a_i/S)^2
  //         = -(2/S) [ (y_j - p_j) - sum_i (y_i - p_i) p_i ]
  double resid_dot_p = 0.0;
  std::vector<double> p_hat(c);
  for (std::size_t i = 0; i < c; ++i) {
    p_hat[i] = params[i] / s;
    resid_dot_p += (target[i] - p_hat[i]) * p_hat[i];
  }

  // var term: sum_i a_i(S - a_i) = S^2 - Q with Q = sum a_i^2, over D = S^2(S+1).
  double q = 0.0;
  for (std::size_t i = 0; i < c; ++i) q += params[i] * params[i];
  const double v = s * s - q;
  const double denom = s * s * (s + 1.0);
  const double ddenom = 3.0 * s * s + 2.0 * s;

  std::vector<double> grad(c);
  for (std::size_t j = 0; j < c; ++j) {
    const double g_err = -(2.0 / s) * ((target[j] - p_hat[j]) - resid_dot_p);
    const double g_var = ((2.0 * s - 2.0 * params[j]) * denom - v * ddenom) / (denom * denom);
    grad[j] = g_err + g_var;
  }
  return grad;
}

double mse_loss(const LabelDistribution& prediction, const LabelDistribution& target) {
  require_same_size(prediction.size(), target.size(), "mse_loss");
  double sum = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = target[i] - prediction[i];
    sum += d * d;
  }
  return sum;
}

double log_beta(std::span<const double> alpha) {
  double sum = 0.0;
  double lg = 0.0;
  for (double a : alpha) {
    lg += std::lgamma(a);
    sum += a;
  }
  return lg - std::lgamma(sum);
}

}  // namespace cdl
