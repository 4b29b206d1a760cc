#include "cdl/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "cdl/data_io.hpp"
#include "cdl/errors.hpp"
#include "cdl/recovery.hpp"
#include "cdl/rng.hpp"

namespace cdl {

namespace {

const char* protocol_name(Protocol p) {
  return p == Protocol::kHideLast ? "hide-last" : "native-cd";
}

struct MetricAccumulator {
  double chebyshev = 0.0, clark = 0.0, kl = 0.0, cosine = 0.0;
  int count = 0;

  void add(const MetricReport& r) {
    chebyshev += r.chebyshev;
    clark += r.clark;
    kl += r.kl;
    cosine += r.cosine;
    ++count;
  }
  MetricReport mean() const {
    const double k = count;
    return {chebyshev / k, clark / k, kl / k, cosine / k};
  }
};

MetricReport fold_mean(const std::vector<FoldScore>& folds) {
  MetricAccumulator acc;
  for (const FoldScore& f : folds) acc.add(f.metrics);
  return acc.mean();
}

MetricReport fold_stddev(const std::vector<FoldScore>& folds, const MetricReport& mean) {
  const double k = static_cast<double>(folds.size());
  MetricReport out;
  for (const FoldScore& f : folds) {
    out.chebyshev += (f.metrics.chebyshev - mean.chebyshev) * (f.metrics.chebyshev - mean.chebyshev);
    out.clark += (f.metrics.clark - mean.clark) * (f.metrics.clark - mean.clark);
    out.kl += (f.metrics.kl - mean.kl) * (f.metrics.kl - mean.kl);
    out.cosine += (f.metrics.cosine - mean.cosine) * (f.metrics.cosine - mean.cosine);
  }
  const double denom = k > 1.0 ? k - 1.0 : 1.0;
  out.chebyshev = std::sqrt(out.chebyshev / denom);
  out.clark = std::sqrt(out.clark / denom);
  out.kl = std::sqrt(out.kl / denom);
  out.cosine = std::sqrt(out.cosine / denom);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_row(std::ofstream& out, const std::string& method, const std::string& fold,
               const MetricReport& m, double mu_mae, double train_mu, double mu_const) {
  out << method << "\t" << fold << "\t" << format_number(m.chebyshev) << "\t"
      << format_number(m.clark) << "\t" << format_number(m.kl) << "\t"
      << format_number(m.cosine) << "\t" << format_number(mu_mae) << "\t"
      << format_number(train_mu) << "\t" << format_number(mu_const) << "\n";
}

std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, '\t')) cells.push_back(cell);
  return cells;
}

}  // namespace

std::vector<std::vector<int>> make_folds(int n, int folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) {
    throw ValidationError("fold count must be in [2, n], got " + std::to_string(folds) +
                          " with n=" + std::to_string(n));
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  RandomStream stream(seed);
  stream.shuffle(order);

  std::vector<std::vector<int>> out(folds);
  const int base = n / folds;
  const int extra = n % folds;
  int pos = 0;
  for (int f = 0; f < folds; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    out[f].assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return out;
}

ProtocolView apply_protocol(const Dataset& dataset, Protocol protocol) {
  validate_dataset(dataset);
  const int n = dataset.n();
  const int c = dataset.label_count;
  ProtocolView view;
  if (protocol == Protocol::kHideLast) {
    if (dataset.target_kind != TargetKind::kLabel) {
      throw ValidationError("hide-last protocol needs label-distribution targets");
    }
    if (c < 3) throw ValidationError("hide-last protocol needs at least 3 classes");
    ProtocolPair pair = hide_last_label(dataset.targets);
    view.train_targets = std::move(pair.train_targets);
    view.eval_targets = std::move(pair.eval_targets);
  } else {
    if (dataset.target_kind != TargetKind::kConcentration) {
      throw ValidationError("native-cd protocol needs concentration-distribution targets");
    }
    view.eval_targets = dataset.targets;
    view.train_targets = Matrix(n, c);
    for (int r = 0; r < n; ++r) {
      const auto row = view.eval_targets.row(r);
      const double spread = row[c] / static_cast<double>(c);
      for (int i = 0; i < c; ++i) view.train_targets(r, i) = row[i] + spread;
    }
  }
  return view;
}

CvReport run_cv(const Dataset& dataset, const ExperimentConfig& config) {
  const int n = dataset.n();
  const int m = dataset.m();
  const int c = dataset.label_count;

  ProtocolView view = apply_protocol(dataset, config.protocol);
  const Matrix& train_targets = view.train_targets;
  const Matrix& eval_targets = view.eval_targets;
  const int out_dim = static_cast<int>(train_targets.cols());
  const int eval_width = static_cast<int>(eval_targets.cols());

  const auto folds = make_folds(n, config.folds, config.master_seed);

  CvReport report;
  report.dataset = config.dataset_path.empty() ? "dataset"
                                               : config.dataset_path.stem().string();
  report.protocol = config.protocol;
  report.n = n;
  report.label_count = c;
  report.folds = config.folds;
  report.master_seed = config.master_seed;
  report.methods.emplace_back();
  report.methods.back().method = "cdl";
  if (config.baseline) {
    report.methods.emplace_back();
    report.methods.back().method = "noise-append";
  }

  for (int f = 0; f < config.folds; ++f) {
    const std::vector<int>& test = folds[f];
    std::vector<int> train_idx;
    train_idx.reserve(n - test.size());
    for (int g = 0; g < config.folds; ++g) {
      if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_idx.begin(), train_idx.end());

    Dataset fold_train;
    fold_train.target_kind = TargetKind::kLabel;
    fold_train.label_count = out_dim;
    fold_train.features = Matrix(train_idx.size(), m);
    fold_train.targets = Matrix(train_idx.size(), out_dim);
    double train_mu_sum = 0.0;
    for (std::size_t r = 0; r < train_idx.size(); ++r) {
      const int src = train_idx[r];
      std::copy_n(dataset.features.row(src).begin(), m, fold_train.features.row(r).begin());
      std::copy_n(train_targets.row(src).begin(), out_dim, fold_train.targets.row(r).begin());
      train_mu_sum += eval_targets(src, eval_width - 1);
    }
    const double train_mu_mean = train_mu_sum / static_cast<double>(train_idx.size());

    NetworkConfig net = config.network;
    net.input_dim = m;
    net.output_dim = out_dim;
    net.seed = RandomStream::derive(config.master_seed, static_cast<std::uint64_t>(f));

    {
      const auto t0 = std::chrono::steady_clock::now();
      const ConfidenceModel model = train(fold_train, net);
      MetricAccumulator acc;
      double mu_mae = 0.0;
      const bool anchored = config.protocol == Protocol::kNativeCd;
      for (const int idx : test) {
        const EvidenceVector ev = forward(model, dataset.features.row(idx));
        const RecoveryResult rec = anchored ? recover_anchored(ev) : recover(ev);
        const std::vector<double> pred = rec.cd.full();
        const auto truth = eval_targets.row(idx);
        acc.add(eval_metrics(truth, pred));
        mu_mae += std::abs(rec.cd.background() - truth[eval_width - 1]);
      }
      FoldScore score;
      score.fold = f;
      score.metrics = acc.mean();
      score.mu_mae = mu_mae / static_cast<double>(test.size());
      score.seconds = seconds_since(t0);
      report.methods[0].folds.push_back(score);
    }

    if (config.baseline) {
      const auto t0 = std::chrono::steady_clock::now();
      const ConfidenceModel model = train_softmax_baseline(fold_train, net);
      RandomStream noise(RandomStream::derive(config.master_seed,
                                              (1ULL << 32) + static_cast<std::uint64_t>(f)));
      MetricAccumulator acc;
      double mu_mae = 0.0;
      for (const int idx : test) {
        const LabelDistribution p = predict_label_softmax(model, dataset.features.row(idx));
        const double g = eval_targets(idx, eval_width - 1);
        const ConcentrationDistribution cd = noise_append_baseline(p, g, noise);
        const std::vector<double> pred = cd.full();
        acc.add(eval_metrics(eval_targets.row(idx), pred));
        mu_mae += std::abs(cd.background() - g);
      }
      FoldScore score;
      score.fold = f;
      score.metrics = acc.mean();
      score.mu_mae = mu_mae / static_cast<double>(test.size());
      score.seconds = seconds_since(t0);
      report.methods[1].folds.push_back(score);
    }

    double mu_const = 0.0;
    for (const int idx : test) {
      mu_const += std::abs(train_mu_mean - eval_targets(idx, eval_width - 1));
    }
    report.fold_train_mu_mean.push_back(train_mu_mean);
    report.fold_mu_mae_const.push_back(mu_const / static_cast<double>(test.size()));
  }

  for (MethodResult& method : report.methods) {
    method.mean = fold_mean(method.folds);
    method.stddev = fold_stddev(method.folds, method.mean);
    double mu = 0.0;
    for (const FoldScore& fsc : method.folds) mu += fsc.mu_mae;
    method.mu_mae_mean = mu / static_cast<double>(method.folds.size());
  }
  return report;
}

CvReport run_cv(const ExperimentConfig& config) {
  return run_cv(load_dataset(config.dataset_path), config);
}

void write_cv_report(const CvReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto report_path = dir / "cv_report.tsv";
  std::ofstream out(report_path);
  if (!out) throw IoError("cannot open '" + report_path.string() + "' for writing");

  out << "# cv dataset=" << report.dataset << " protocol=" << protocol_name(report.protocol)
      << " folds=" << report.folds << " seed=" << report.master_seed << " n=" << report.n
      << " c=" << report.label_count << "\n";
  if (report.protocol == Protocol::kHideLast) {
    out << "# note: training targets are the visible classes renormalized to a simplex; "
           "the hidden class is restored only for evaluation\n";
  } else {
    out << "# note: training targets are the apparent label distribution; predictions "
           "are decoded with the minimal-evidence convention\n";
  }
  out << "method\tfold\tchebyshev\tclark\tkl\tcosine\tmu_mae\ttrain_mu_mean\tmu_mae_const\n";

  const double k = static_cast<double>(report.folds);
  double mu_mean_avg = 0.0, mu_const_avg = 0.0;
  for (int f = 0; f < report.folds; ++f) {
    mu_mean_avg += report.fold_train_mu_mean[f];
    mu_const_avg += report.fold_mu_mae_const[f];
  }
  mu_mean_avg /= k;
  mu_const_avg /= k;

  for (const MethodResult& method : report.methods) {
    for (const FoldScore& f : method.folds) {
      write_row(out, method.method, std::to_string(f.fold), f.metrics, f.mu_mae,
                report.fold_train_mu_mean[f.fold], report.fold_mu_mae_const[f.fold]);
    }
    write_row(out, method.method, "mean", method.mean, method.mu_mae_mean, mu_mean_avg,
              mu_const_avg);
    double mu_sq = 0.0;
    for (const FoldScore& f : method.folds) {
      mu_sq += (f.mu_mae - method.mu_mae_mean) * (f.mu_mae - method.mu_mae_mean);
    }
    const double denom = k > 1.0 ? k - 1.0 : 1.0;
    write_row(out, method.method, "std", method.stddev, std::sqrt(mu_sq / denom), 0.0, 0.0);
  }
  if (!out) throw IoError("failed writing '" + report_path.string() + "'");

  const auto timings_path = dir / "timings.tsv";
  std::ofstream tout(timings_path);
  if (!tout) throw IoError("cannot open '" + timings_path.string() + "' for writing");
  tout << "# timings dataset=" << report.dataset
       << " (wall seconds; hardware-dependent, kept out of cv_report.tsv so that file "
          "stays byte-reproducible)\n";
  tout << "method\tfold\tseconds\n";
  for (const MethodResult& method : report.methods) {
    for (const FoldScore& f : method.folds) {
      tout << method.method << "\t" << f.fold << "\t" << format_number(f.seconds) << "\n";
    }
  }
  if (!tout) throw IoError("failed writing '" + timings_path.string() + "'");
}

CvSummary read_cv_summary(const std::filesystem::path& tsv) {
  std::ifstream in(tsv);
  if (!in) throw IoError("cannot open '" + tsv.string() + "'");
  CvSummary summary;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("dataset=");
      if (pos != std::string::npos && summary.dataset.empty()) {
        const auto end = line.find(' ', pos);
        summary.dataset = line.substr(pos + 8, end == std::string::npos ? end : end - pos - 8);
      }
      continue;
    }
    const std::vector<std::string> cells = split_tsv(line);
    if (!saw_header) {
      if (cells.size() < 6 || cells[0] != "method" || cells[1] != "fold") {
        throw ValidationError("'" + tsv.string() + "': unrecognized report header");
      }
      saw_header = true;
      continue;
    }
    if (cells.size() < 6 || cells[1] != "mean") continue;
    MethodSummary ms;
    ms.method = cells[0];
    try {
      ms.mean.chebyshev = std::stod(cells[2]);
      ms.mean.clark = std::stod(cells[3]);
      ms.mean.kl = std::stod(cells[4]);
      ms.mean.cosine = std::stod(cells[5]);
    } catch (const std::exception&) {
      throw ValidationError("'" + tsv.string() + "': non-numeric mean row");
    }
    summary.methods.push_back(std::move(ms));
  }
  if (summary.methods.empty()) {
    throw ValidationError("'" + tsv.string() + "': no mean rows found");
  }
  if (summary.dataset.empty()) summary.dataset = tsv.stem().string();
  return summary;
}

void write_rank_report(const std::vector<CvSummary>& summaries,
                       const std::filesystem::path& dir, double critical_difference) {
  if (summaries.empty()) throw ValidationError("rank report: no summaries");

  std::vector<std::string> methods;
  for (const MethodSummary& ms : summaries.front().methods) methods.push_back(ms.method);
  std::sort(methods.begin(), methods.end());
  const int k = static_cast<int>(methods.size());
  const int n_datasets = static_cast<int>(summaries.size());

  // scores[metric] is an N x k matrix in the sorted method order
  std::array<Matrix, 4> scores;
  for (auto& s : scores) s = Matrix(n_datasets, k);
  std::vector<std::string> dataset_names;
  for (int d = 0; d < n_datasets; ++d) {
    const CvSummary& s = summaries[d];
    dataset_names.push_back(s.dataset);
    std::map<std::string, const MethodSummary*> by_name;
    for (const MethodSummary& ms : s.methods) by_name[ms.method] = &ms;
    if (static_cast<int>(by_name.size()) != k) {
      throw ValidationError("rank report: '" + s.dataset + "' has a different method set");
    }
    for (int j = 0; j < k; ++j) {
      const auto it = by_name.find(methods[j]);
      if (it == by_name.end()) {
        throw ValidationError("rank report: '" + s.dataset + "' is missing method '" +
                              methods[j] + "'");
      }
      scores[0](d, j) = it->second->mean.chebyshev;
      scores[1](d, j) = it->second->mean.clark;
      scores[2](d, j) = it->second->mean.kl;
      scores[3](d, j) = it->second->mean.cosine;
    }
  }

  const std::array<const char*, 4> metric_names = {"chebyshev", "clark", "kl", "cosine"};
  std::array<RankTable, 4> tables;
  for (int t = 0; t < 4; ++t) {
    if (k < 2) {
      // A lone method ranks first everywhere; nothing to compare.
      tables[t] = RankTable{methods, dataset_names, Matrix(n_datasets, 1, 1.0), {1.0}};
      continue;
    }
    const Direction dir_t = t == 3 ? Direction::kHigherBetter : Direction::kLowerBetter;
    tables[t] = average_ranks(scores[t], dir_t, methods, dataset_names);
  }

  std::filesystem::create_directories(dir);
  const auto ranks_path = dir / "ranks.tsv";
  std::ofstream rout(ranks_path);
  if (!rout) throw IoError("cannot open '" + ranks_path.string() + "' for writing");
  rout << "# per-dataset method ranks; ties share the mean position, lower is better\n";
  rout << "metric\tdataset";
  for (const std::string& m : methods) rout << "\t" << m;
  rout << "\n";
  for (int t = 0; t < 4; ++t) {
    for (int d = 0; d < n_datasets; ++d) {
      rout << metric_names[t] << "\t" << dataset_names[d];
      for (int j = 0; j < k; ++j) rout << "\t" << format_number(tables[t].ranks(d, j));
      rout << "\n";
    }
    rout << metric_names[t] << "\taverage";
    for (int j = 0; j < k; ++j) rout << "\t" << format_number(tables[t].average_ranks[j]);
    rout << "\n";
  }
  if (!rout) throw IoError("failed writing '" + ranks_path.string() + "'");

  const auto friedman_path = dir / "friedman.tsv";
  std::ofstream fout(friedman_path);
  if (!fout) throw IoError("cannot open '" + friedman_path.string() + "' for writing");
  fout << "# chi_square is the Friedman rank statistic; it is often tabulated under an "
          "F label, so the Iman-Davenport F form is listed separately to keep the two "
          "distinct\n";
  if (std::isfinite(critical_difference)) {
    fout << "# bonferroni-dunn critical difference (configured): "
         << format_number(critical_difference) << "\n";
  }
  if (k < 2 || n_datasets < 2) {
    fout << "# skipped: Friedman statistics need at least 2 methods and 2 datasets\n";
  } else {
    fout << "metric\tchi_square\timan_davenport_f\tdatasets\tmethods\n";
    for (int t = 0; t < 4; ++t) {
      const double chi2 = friedman_statistic(tables[t].average_ranks, n_datasets, k);
      const double f_form = iman_davenport_f(chi2, n_datasets, k);
      fout << metric_names[t] << "\t" << format_number(chi2) << "\t"
           << format_number(f_form) << "\t" << n_datasets << "\t" << k << "\n";
    }
  }
  if (!fout) throw IoError("failed writing '" + friedman_path.string() + "'");
}

}  // namespace cdl
