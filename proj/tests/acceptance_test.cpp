// End-to-end acceptance gate. Each numbered check prints one [PASS]/[FAIL]
// line; the process exits nonzero if any check fails. The slow checks (the
// Monte Carlo oracle and the full cross-validation runs) carry their own
// wall-clock budgets, asserted here as well.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cdl/confidence_net.hpp"
#include "cdl/data_io.hpp"
#include "cdl/dirichlet.hpp"
#include "cdl/harness.hpp"
#include "cdl/metrics.hpp"
#include "cdl/recovery.hpp"
#include "cdl/rng.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome.pass = false;
    outcome.detail = std::string("exception: ") + e.what();
  }
  if (!outcome.pass) ++failures;
  std::printf("[%s] %d/9 %s%s%s\n", outcome.pass ? "PASS" : "FAIL", id, name.c_str(),
              outcome.detail.empty() ? "" : " — ", outcome.detail.c_str());
  std::fflush(stdout);
}

cdl::LabelDistribution random_simplex(cdl::RandomStream& rng, int c) {
  std::vector<double> raw(c);
  for (double& v : raw) v = rng.gamma(1.0);
  return cdl::normalize(raw);
}

double mc_loss(const cdl::DirichletParams& params, const cdl::LabelDistribution& y,
               cdl::RandomStream& rng, std::size_t count) {
  double acc = 0.0;
  std::size_t done = 0;
  while (done < count) {
    const std::size_t take = std::min<std::size_t>(200000, count - done);
    for (const cdl::LabelDistribution& p : cdl::dirichlet_sample(params, rng, take)) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = y[i] - p[i];
        d2 += d * d;
      }
      acc += d2;
    }
    done += take;
  }
  return acc / static_cast<double>(count);
}

// ---- 1: closed-form loss vs Monte Carlo --------------------------------

Outcome check_loss_oracle() {
  const auto start = Clock::now();
  cdl::RandomStream rng(101);

  const cdl::LossBreakdown spot =
      cdl::amse_loss(cdl::DirichletParams({1.0, 1.0}), cdl::LabelDistribution({1.0, 0.0}));
  if (std::abs(spot.total - 2.0 / 3.0) > 1e-12) {
    return {false, "flat-prior spot value " + fmt(spot.total) + " != 2/3"};
  }

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 2 + static_cast<int>(rng.below(9));
    std::vector<double> alpha(c);
    for (double& a : alpha) a = rng.uniform(1e-3, 20.0);
    const cdl::DirichletParams params(alpha);
    const cdl::LabelDistribution y = random_simplex(rng, c);
    const double exact = cdl::amse_loss(params, y).total;
    const double estimate = mc_loss(params, y, rng, 1000000);
    worst = std::max(worst, std::abs(estimate - exact) / exact);
  }
  const double elapsed = seconds_since(start);
  if (worst > 1e-2) return {false, "worst relative error " + fmt(worst) + " > 1e-2"};
  if (elapsed > 120.0) return {false, "took " + fmt(elapsed) + "s > 120s"};
  return {true, "worst rel err " + fmt(worst) + ", spot value exact, " + fmt(elapsed) + "s"};
}

// ---- 2: analytic gradients vs finite differences -----------------------

Outcome check_gradients() {
  const auto start = Clock::now();
  cdl::RandomStream rng(202);
  const double step = 1e-5;

  // Loss gradient in the parameter vector.
  double worst_param = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int c = 2 + static_cast<int>(rng.below(9));
    std::vector<double> alpha(c);
    for (double& a : alpha) a = rng.uniform(1e-3, 20.0);
    const cdl::LabelDistribution y = random_simplex(rng, c);
    const auto exact = cdl::amse_gradient(cdl::DirichletParams(alpha), y);
    for (int i = 0; i < c; ++i) {
      std::vector<double> hi = alpha, lo = alpha;
      hi[i] += step;
      lo[i] -= step;
      const double fd = (cdl::amse_loss(cdl::DirichletParams(hi), y).total -
                         cdl::amse_loss(cdl::DirichletParams(lo), y).total) /
                        (2.0 * step);
      const double err = std::abs(exact[i] - fd) / std::max(std::abs(fd), 1e-4);
      worst_param = std::max(worst_param, err);
    }
  }
  if (worst_param > 1e-4) {
    return {false, "loss gradient rel err " + fmt(worst_param) + " > 1e-4"};
  }

  // Backpropagated gradient through the network.
  double worst_net = 0.0;
  for (int trial = 0; trial < 22; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(4));
    const int c = 2 + static_cast<int>(rng.below(3));
    std::vector<int> hidden;
    if (trial % 3 != 0) hidden.push_back(2 + static_cast<int>(rng.below(4)));
    cdl::NetworkConfig cfg;
    cfg.input_dim = m;
    cfg.output_dim = c;
    cfg.hidden_dims = hidden;
    std::vector<cdl::Layer> layers;
    int in = m;
    std::vector<int> widths = hidden;
    widths.push_back(c);
    for (const int out : widths) {
      cdl::Matrix w(out, in);
      for (double& v : w.data()) v = rng.uniform(-0.9, 0.9);
      std::vector<double> b(out);
      for (double& v : b) v = rng.uniform(-0.5, 0.5);
      layers.push_back(cdl::Layer{std::move(w), std::move(b)});
      in = out;
    }
    const cdl::ConfidenceModel model(cfg, std::move(layers));
    std::vector<double> x(m);
    for (double& v : x) v = rng.uniform(-1.5, 1.5);
    const cdl::LabelDistribution y = random_simplex(rng, c);
    const auto exact = cdl::backward(model, x, y);

    const auto loss_with = [&](std::size_t li, bool is_bias, std::size_t idx, double d) {
      std::vector<cdl::Layer> bumped = model.layers();
      if (is_bias) {
        bumped[li].bias[idx] += d;
      } else {
        bumped[li].weights.data()[idx] += d;
      }
      const cdl::ConfidenceModel probe(model.config(), std::move(bumped));
      return cdl::amse_loss(cdl::predict_alpha(probe, x), y).total;
    };
    for (std::size_t li = 0; li < exact.size(); ++li) {
      for (std::size_t i = 0; i < exact[li].weights.data().size(); ++i) {
        const double fd =
            (loss_with(li, false, i, step) - loss_with(li, false, i, -step)) / (2.0 * step);
        const double err =
            std::abs(exact[li].weights.data()[i] - fd) / std::max(std::abs(fd), 1e-4);
        worst_net = std::max(worst_net, err);
      }
      for (std::size_t i = 0; i < exact[li].bias.size(); ++i) {
        const double fd =
            (loss_with(li, true, i, step) - loss_with(li, true, i, -step)) / (2.0 * step);
        const double err = std::abs(exact[li].bias[i] - fd) / std::max(std::abs(fd), 1e-4);
        worst_net = std::max(worst_net, err);
      }
    }
  }
  const double elapsed = seconds_since(start);
  if (worst_net > 1e-3) {
    return {false, "backprop gradient rel err " + fmt(worst_net) + " > 1e-3"};
  }
  if (elapsed > 60.0) return {false, "took " + fmt(elapsed) + "s > 60s"};
  return {true, "loss grad rel err " + fmt(worst_param) + ", backprop rel err " +
                    fmt(worst_net) + ", " + fmt(elapsed) + "s"};
}

// ---- 3: the six-adjective rating example -------------------------------

Outcome check_rating_example() {
  const cdl::RatingMatrix ratings{
      cdl::Matrix::from_rows({{3.0, 4.8, 1.2, 2.1, 2.4, 1.5}}), 5.0};
  const cdl::Matrix cd = cdl::build_cdl_from_ratings(ratings);
  const std::vector<double> want = {0.1, 0.16, 0.04, 0.07, 0.08, 0.05, 0.5};
  if (cd.rows() != 1 || cd.cols() != 7) return {false, "wrong output shape"};
  for (std::size_t j = 0; j < want.size(); ++j) {
    if (std::abs(cd(0, j) - want[j]) > 1e-12) {
      return {false, "entry " + std::to_string(j) + " = " + fmt(cd(0, j)) +
                         " != " + fmt(want[j])};
    }
  }
  return {true, "all seven entries exact"};
}

// ---- 4: Friedman statistic reference values ----------------------------

Outcome check_friedman_references() {
  const std::vector<double> cheb = {1.67, 5.17, 4.67, 3.42, 3.92, 4.25, 4.92};
  const double chi_cheb = cdl::friedman_statistic(cheb, 12, 7);
  if (std::abs(chi_cheb - 22.2645) > 0.05) {
    return {false, "chebyshev ranks give " + fmt(chi_cheb) + ", want 22.2645 +- 0.05"};
  }
  const std::vector<double> clark = {1.00, 5.83, 5.75, 3.67, 3.67, 4.00, 4.08};
  const double chi_clark = cdl::friedman_statistic(clark, 12, 7);
  if (std::abs(chi_clark - 40.2058) > 0.05) {
    return {false, "clark ranks give " + fmt(chi_clark) + ", want 40.2058 +- 0.05"};
  }
  return {true, "chebyshev " + fmt(chi_cheb) + ", clark " + fmt(chi_clark)};
}

// ---- 5: recovery identities --------------------------------------------

Outcome check_recovery_identities() {
  cdl::RandomStream rng(505);
  double worst_sum = 0.0, worst_mean = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int c = 2 + static_cast<int>(rng.below(9));
    std::vector<double> e(c);
    for (double& v : e) v = rng.uniform(0.0, 30.0);
    const cdl::RecoveryResult r = cdl::recover(cdl::EvidenceVector(e));

    double mass = r.cd.background();
    for (const double b : r.cd.label_part()) mass += b;
    worst_sum = std::max(worst_sum, std::abs(mass - 1.0));

    std::vector<double> alpha(c);
    for (int i = 0; i < c; ++i) alpha[i] = e[i] + 1.0;
    const cdl::LabelDistribution mean = cdl::dirichlet_mean(cdl::DirichletParams(alpha));
    const cdl::LabelDistribution apparent = cdl::apparent_expectation(r.cd);
    for (int i = 0; i < c; ++i) {
      worst_mean = std::max(worst_mean, std::abs(apparent[i] - mean[i]));
    }
  }
  if (worst_sum > 1e-12) return {false, "mass closure off by " + fmt(worst_sum)};
  if (worst_mean > 1e-12) {
    return {false, "apparent view differs from the mean by " + fmt(worst_mean)};
  }
  return {true, "1000 vectors, worst closure " + fmt(worst_sum) + ", worst mean gap " +
                    fmt(worst_mean)};
}

// ---- 6/7/8: the synthetic pipeline -------------------------------------

struct CvOutcome {
  cdl::CvReport report;
  double seconds = 0.0;
};

CvOutcome run_synth_cv(std::uint64_t seed) {
  const cdl::SynthData synth = cdl::synth_generate(2000, 24, 6, seed);
  cdl::ExperimentConfig cfg;
  cfg.protocol = cdl::Protocol::kNativeCd;
  cfg.folds = 10;
  cfg.master_seed = seed;
  const auto start = Clock::now();
  CvOutcome out{cdl::run_cv(synth.dataset, cfg), 0.0};
  out.seconds = seconds_since(start);
  return out;
}

std::optional<CvOutcome> pipeline_run;  // seed 1 run, shared by checks 6-8

Outcome check_synthetic_recovery() {
  pipeline_run = run_synth_cv(1);
  const cdl::MethodResult& method = pipeline_run->report.methods.at(0);
  const double cheb = method.mean.chebyshev;
  const double cosine = method.mean.cosine;
  if (cheb > 0.05) return {false, "mean chebyshev " + fmt(cheb) + " > 0.05"};
  if (cosine < 0.99) return {false, "mean cosine " + fmt(cosine) + " < 0.99"};
  if (pipeline_run->seconds > 300.0) {
    return {false, "took " + fmt(pipeline_run->seconds) + "s > 300s"};
  }
  return {true, "mean chebyshev " + fmt(cheb) + ", mean cosine " + fmt(cosine) + ", " +
                    fmt(pipeline_run->seconds) + "s"};
}

Outcome check_background_tracking() {
  std::string detail;
  for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const cdl::CvReport report = (seed == 1 && pipeline_run)
                                     ? pipeline_run->report
                                     : run_synth_cv(seed).report;
    const cdl::MethodResult& method = report.methods.at(0);
    double const_mae = 0.0;
    for (const double v : report.fold_mu_mae_const) const_mae += v;
    const_mae /= static_cast<double>(report.fold_mu_mae_const.size());
    if (!(method.mu_mae_mean < const_mae)) {
      return {false, "seed " + std::to_string(seed) + ": recovered background error " +
                         fmt(method.mu_mae_mean) + " not below the constant predictor's " +
                         fmt(const_mae)};
    }
    if (!detail.empty()) detail += "; ";
    detail += "seed " + std::to_string(seed) + ": " + fmt(method.mu_mae_mean) + " < " +
              fmt(const_mae);
  }
  return {true, detail};
}

Outcome check_determinism() {
  if (!pipeline_run) pipeline_run = run_synth_cv(1);
  const CvOutcome repeat = run_synth_cv(1);

  const fs::path dir = fs::temp_directory_path() / "cdl_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  cdl::write_cv_report(pipeline_run->report, dir / "a");
  cdl::write_cv_report(repeat.report, dir / "b");

  const auto slurp = [](const fs::path& p) {
    std::ostringstream o;
    o << std::ifstream(p, std::ios::binary).rdbuf();
    return o.str();
  };
  const std::string a = slurp(dir / "a" / "cv_report.tsv");
  const std::string b = slurp(dir / "b" / "cv_report.tsv");
  fs::remove_all(dir);
  if (a.empty()) return {false, "empty report file"};
  if (a != b) return {false, "repeated run produced different report bytes"};
  return {true, "repeated run reproduced cv_report.tsv byte for byte (" +
                    std::to_string(a.size()) + " bytes)"};
}

// ---- 9: metric hand values ---------------------------------------------

Outcome check_metric_values() {
  const std::vector<double> t1 = {0.2, 0.8}, p1 = {0.5, 0.5};
  const cdl::MetricReport r1 = cdl::eval_metrics(t1, p1);
  if (std::abs(r1.chebyshev - 0.3) > 1e-4 || std::abs(r1.clark - 0.48675) > 1e-4 ||
      std::abs(r1.kl - 0.19274) > 1e-4 || std::abs(r1.cosine - 0.85749) > 1e-4) {
    return {false, "skewed pair gave (" + fmt(r1.chebyshev) + ", " + fmt(r1.clark) + ", " +
                       fmt(r1.kl) + ", " + fmt(r1.cosine) + ")"};
  }
  const std::vector<double> t2 = {1.0, 0.0}, p2 = {0.5, 0.5};
  const cdl::MetricReport r2 = cdl::eval_metrics(t2, p2);
  if (std::abs(r2.chebyshev - 0.5) > 1e-4 || std::abs(r2.clark - 1.05409) > 1e-4 ||
      std::abs(r2.kl - 0.69315) > 1e-4 || std::abs(r2.cosine - 0.70711) > 1e-4) {
    return {false, "corner pair gave (" + fmt(r2.chebyshev) + ", " + fmt(r2.clark) + ", " +
                       fmt(r2.kl) + ", " + fmt(r2.cosine) + ")"};
  }
  const std::vector<double> d = {0.35, 0.4, 0.25};
  const cdl::MetricReport id = cdl::eval_metrics(d, d);
  if (id.chebyshev != 0.0 || id.clark != 0.0 || id.kl != 0.0 || id.cosine != 1.0) {
    return {false, "identity pair is not exactly (0, 0, 0, 1)"};
  }
  return {true, "both hand-checked pairs within 1e-4, identity exact"};
}

}  // namespace

int main() {
  std::printf("acceptance gate: 9 checks\n");
  report(1, "closed-form loss matches the Monte Carlo oracle", check_loss_oracle);
  report(2, "analytic gradients match finite differences", check_gradients);
  report(3, "rating row converts to the documented concentration row", check_rating_example);
  report(4, "rank statistic reproduces its reference values", check_friedman_references);
  report(5, "recovery closes the simplex and matches the mean", check_recovery_identities);
  report(6, "cross-validated synthetic recovery is tight", check_synthetic_recovery);
  report(7, "recovered background beats the constant predictor", check_background_tracking);
  report(8, "repeated runs are byte-identical", check_determinism);
  report(9, "metric hand values and the identity score", check_metric_values);
  if (failures > 0) {
    std::printf("%d of 9 checks failed\n", failures);
    return 1;
  }
  std::printf("all 9 checks passed\n");
  return 0;
}
