#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cdl/confidence_net.hpp"
#include "cdl/dataset.hpp"
#include "cdl/metrics.hpp"

namespace cdl {

/// hide-last: label-distribution targets, the last class becomes the unseen
/// background. native-cd: concentration-distribution targets, training sees
/// the implied apparent label distribution.
enum class Protocol { kHideLast, kNativeCd };

struct ExperimentConfig {
  std::filesystem::path dataset_path;
  Protocol protocol = Protocol::kHideLast;
  NetworkConfig network;  // input/output dims are filled per protocol
  int folds = 10;
  std::uint64_t master_seed = 0;
  bool baseline = false;  // also run the noise-append softmax predictor
  std::filesystem::path out_dir;
};

/// One test fold: metric means over its instances plus the background error.
struct FoldScore {
  int fold = 0;
  MetricReport metrics;
  double mu_mae = 0.0;
  double seconds = 0.0;  // wall time, reported separately from the metrics
};

struct MethodResult {
  std::string method;
  std::vector<FoldScore> folds;
  MetricReport mean;
  MetricReport stddev;  // sample standard deviation over folds
  double mu_mae_mean = 0.0;
};

struct CvReport {
  std::string dataset;
  Protocol protocol = Protocol::kHideLast;
  int n = 0;
  int label_count = 0;
  int folds = 0;
  std::uint64_t master_seed = 0;
  /// Ground-truth background statistics per fold: the training-split mean
  /// and the test error of the predictor that always answers that mean.
  std::vector<double> fold_train_mu_mean;
  std::vector<double> fold_mu_mae_const;
  std::vector<MethodResult> methods;
};

/// Target views implied by a protocol. train_targets are label simplex rows
/// the network regresses on; eval_targets are the ground-truth concentration
/// rows (one column wider) the predictions are scored against.
struct ProtocolView {
  Matrix train_targets;
  Matrix eval_targets;
};

/// hide-last needs label targets with >= 3 classes; native-cd needs
/// concentration targets, whose training view spreads the background
/// uniformly across the labels.
ProtocolView apply_protocol(const Dataset& dataset, Protocol protocol);

/// Seeded shuffle then contiguous chunks; sizes differ by at most one and
/// every index lands in exactly one fold.
std::vector<std::vector<int>> make_folds(int n, int folds, std::uint64_t seed);

/// Ten-fold style cross-validation of the evidence pipeline (plus optionally
/// the noise-append baseline) on one dataset. Deterministic given
/// config.master_seed; fold seeds are derived, so parallel execution order
/// cannot change results.
CvReport run_cv(const Dataset& dataset, const ExperimentConfig& config);

/// Loads config.dataset_path first.
CvReport run_cv(const ExperimentConfig& config);

/// Writes cv_report.tsv (byte-reproducible; no wall times) and timings.tsv
/// (wall seconds, hardware-dependent) into the directory.
void write_cv_report(const CvReport& report, const std::filesystem::path& dir);

/// Per-method metric means parsed back from a cv_report.tsv.
struct MethodSummary {
  std::string method;
  MetricReport mean;
};

struct CvSummary {
  std::string dataset;
  std::vector<MethodSummary> methods;
};

CvSummary read_cv_summary(const std::filesystem::path& tsv);

/// Ranks methods per metric across datasets and writes ranks.tsv plus
/// friedman.tsv. Every summary must cover the same method set. Pass a
/// Bonferroni-Dunn critical difference to annotate friedman.tsv, or NaN to
/// leave it out. Friedman statistics need >= 2 methods and >= 2 datasets;
/// below that friedman.tsv records only why it is empty.
void write_rank_report(const std::vector<CvSummary>& summaries,
                       const std::filesystem::path& dir, double critical_difference);

}  // namespace cdl
