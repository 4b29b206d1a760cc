#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdl/confidence_net.hpp"
#include "cdl/data_io.hpp"
#include "cdl/errors.hpp"
#include "cdl/harness.hpp"
#include "cdl/metrics.hpp"
#include "cdl/recovery.hpp"

namespace {

struct Options {
  std::string dataset;
  std::string model;
  std::string out = ".";
  std::string protocol = "hide-last";
  std::string optimizer = "adam";
  std::string truth;
  std::string pred;
  std::string decode = "confidence";
  std::vector<std::string> inputs;
  std::vector<int> hidden;
  int folds = 10;
  int epochs = 500;
  int batch = 32;
  int synth_n = 2000;
  int synth_m = 24;
  int synth_c = 6;
  std::uint64_t seed = 0;
  double lr = 1e-3;
  double scale_max = 0.0;
  double critical_difference = std::nan("");
  bool baseline = false;
};

cdl::Protocol protocol_from(const std::string& name) {
  return name == "native-cd" ? cdl::Protocol::kNativeCd : cdl::Protocol::kHideLast;
}

cdl::NetworkConfig make_network(const Options& o) {
  cdl::NetworkConfig net;
  net.hidden_dims = o.hidden;
  net.seed = o.seed;
  net.learning_rate = o.lr;
  net.epochs = o.epochs;
  net.batch_size = o.batch;
  net.optimizer = o.optimizer == "sgd" ? cdl::Optimizer::kSgd : cdl::Optimizer::kAdam;
  return net;
}

int do_train(const Options& o) {
  const cdl::Dataset ds = cdl::load_dataset(o.dataset);
  const cdl::ProtocolView view = cdl::apply_protocol(ds, protocol_from(o.protocol));

  cdl::Dataset train_ds;
  train_ds.features = ds.features;
  train_ds.targets = view.train_targets;
  train_ds.target_kind = cdl::TargetKind::kLabel;
  train_ds.label_count = static_cast<int>(view.train_targets.cols());

  cdl::NetworkConfig net = make_network(o);
  net.input_dim = ds.m();
  net.output_dim = train_ds.label_count;

  const cdl::ConfidenceModel model = cdl::train(train_ds, net);
  std::filesystem::create_directories(o.out);
  const auto path = std::filesystem::path(o.out) / "model.json";
  cdl::save_model(model, path);
  std::cout << "model written to " << path.string() << " (epochs "
            << model.training_history().size() << ", final loss "
            << cdl::format_number(model.training_history().back().second) << ")\n";
  return 0;
}

int do_predict(const Options& o) {
  const cdl::ConfidenceModel model = cdl::load_model(o.model);
  const cdl::Dataset ds = cdl::load_dataset(o.dataset);
  cdl::TargetTable table;
  table.kind = cdl::TargetKind::kConcentration;
  table.label_count = model.config().output_dim;
  table.rows = cdl::Matrix(ds.n(), table.label_count + 1);
  const bool anchored = o.decode == "anchored";
  for (int r = 0; r < ds.n(); ++r) {
    const cdl::EvidenceVector ev = cdl::forward(model, ds.features.row(r));
    const cdl::RecoveryResult rec = anchored ? cdl::recover_anchored(ev) : cdl::recover(ev);
    const std::vector<double> full = rec.cd.full();
    std::copy(full.begin(), full.end(), table.rows.row(r).begin());
  }
  std::filesystem::create_directories(o.out);
  const auto path = std::filesystem::path(o.out) / "predictions.csv";
  cdl::save_target_table(table, path);
  std::cout << "predictions written to " << path.string() << " (" << ds.n() << " rows)\n";
  return 0;
}

int do_eval(const Options& o) {
  const cdl::TargetTable truth = cdl::load_target_table(o.truth);
  const cdl::TargetTable pred = cdl::load_target_table(o.pred);
  if (truth.rows.cols() != pred.rows.cols() || truth.rows.rows() != pred.rows.rows()) {
    throw cdl::ValidationError("eval: shape mismatch (" + std::to_string(truth.rows.rows()) +
                               "x" + std::to_string(truth.rows.cols()) + " vs " +
                               std::to_string(pred.rows.rows()) + "x" +
                               std::to_string(pred.rows.cols()) + ")");
  }
  const double n = static_cast<double>(truth.rows.rows());
  cdl::MetricReport sum;
  for (std::size_t r = 0; r < truth.rows.rows(); ++r) {
    const cdl::MetricReport m = cdl::eval_metrics(truth.rows.row(r), pred.rows.row(r));
    sum.chebyshev += m.chebyshev;
    sum.clark += m.clark;
    sum.kl += m.kl;
    sum.cosine += m.cosine;
  }
  std::cout << "chebyshev " << cdl::format_number(sum.chebyshev / n) << "\n"
            << "clark " << cdl::format_number(sum.clark / n) << "\n"
            << "kl " << cdl::format_number(sum.kl / n) << "\n"
            << "cosine " << cdl::format_number(sum.cosine / n) << "\n";
  return 0;
}

int do_cv(const Options& o) {
  cdl::ExperimentConfig cfg;
  cfg.dataset_path = o.dataset;
  cfg.protocol = protocol_from(o.protocol);
  cfg.network = make_network(o);
  cfg.folds = o.folds;
  cfg.master_seed = o.seed;
  cfg.baseline = o.baseline;
  cfg.out_dir = o.out;

  const cdl::CvReport report = cdl::run_cv(cfg);
  cdl::write_cv_report(report, o.out);
  for (const cdl::MethodResult& method : report.methods) {
    std::cout << method.method << ": chebyshev " << cdl::format_number(method.mean.chebyshev)
              << "+-" << cdl::format_number(method.stddev.chebyshev) << ", clark "
              << cdl::format_number(method.mean.clark) << "+-"
              << cdl::format_number(method.stddev.clark) << ", kl "
              << cdl::format_number(method.mean.kl) << "+-"
              << cdl::format_number(method.stddev.kl) << ", cosine "
              << cdl::format_number(method.mean.cosine) << "+-"
              << cdl::format_number(method.stddev.cosine) << ", mu_mae "
              << cdl::format_number(method.mu_mae_mean) << "\n";
  }
  std::cout << "report written to " << (std::filesystem::path(o.out) / "cv_report.tsv").string()
            << "\n";
  return 0;
}

int do_build_cdl(const Options& o) {
  cdl::RatingMatrix rm = cdl::load_ratings(o.dataset);
  if (o.scale_max > 0.0) rm.scale_max = o.scale_max;
  cdl::TargetTable table;
  table.rows = cdl::build_cdl_from_ratings(rm);
  table.kind = cdl::TargetKind::kConcentration;
  table.label_count = static_cast<int>(rm.ratings.cols());
  std::filesystem::create_directories(o.out);
  const auto path = std::filesystem::path(o.out) / "cdl.csv";
  cdl::save_target_table(table, path);
  std::cout << "concentration distributions written to " << path.string() << " ("
            << table.rows.rows() << " rows)\n";
  return 0;
}

int do_synth(const Options& o) {
  const cdl::SynthData sd = cdl::synth_generate(o.synth_n, o.synth_m, o.synth_c, o.seed);
  std::filesystem::create_directories(o.out);
  const auto data_path = std::filesystem::path(o.out) / "dataset.csv";
  cdl::save_dataset(sd.dataset, data_path);
  const auto map_path = std::filesystem::path(o.out) / "evidence_map.tsv";
  std::ofstream map_out(map_path);
  if (!map_out) throw cdl::IoError("cannot open '" + map_path.string() + "' for writing");
  map_out << "# generating evidence map W (c x m), e = W x\n";
  for (std::size_t r = 0; r < sd.evidence_map.rows(); ++r) {
    for (std::size_t j = 0; j < sd.evidence_map.cols(); ++j) {
      if (j) map_out << "\t";
      map_out << cdl::format_number(sd.evidence_map(r, j));
    }
    map_out << "\n";
  }
  std::cout << "synthetic dataset written to " << data_path.string() << "\n";
  return 0;
}

int do_report(const Options& o) {
  std::vector<cdl::CvSummary> summaries;
  summaries.reserve(o.inputs.size());
  for (const std::string& input : o.inputs) {
    summaries.push_back(cdl::read_cv_summary(input));
  }
  cdl::write_rank_report(summaries, o.out, o.critical_difference);
  std::cout << "rank report written to " << (std::filesystem::path(o.out) / "ranks.tsv").string()
            << " and " << (std::filesystem::path(o.out) / "friedman.tsv").string() << "\n";
  return 0;
}

// CLI11 consumes config files only at the root app, so the per-subcommand
// --config is applied by hand: file values fill exactly those options the
// command line left unset.
void apply_config(CLI::App& cmd, const std::string& path) {
  for (const CLI::ConfigItem& item : cmd.get_config_formatter()->from_file(path)) {
    if (!item.parents.empty()) {
      throw std::runtime_error("sections are not supported: " + item.fullname());
    }
    if (item.name == "config") {
      throw std::runtime_error("config files cannot chain other config files");
    }
    CLI::Option* op = cmd.get_option_no_throw("--" + item.name);
    if (op == nullptr) {
      throw std::runtime_error("unknown key: " + item.name);
    }
    if (!op->empty()) continue;
    for (const std::string& input : item.inputs) op->add_result(input);
    op->run_callback();
  }
}

void add_network_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "master random seed");
  cmd->add_option("--epochs", o.epochs, "training epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", o.lr, "learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--hidden", o.hidden, "hidden layer widths, e.g. 64,32")
      ->delimiter(',');
  cmd->add_option("--batch", o.batch, "minibatch size")->check(CLI::PositiveNumber);
  cmd->add_option("--optimizer", o.optimizer, "update rule")
      ->check(CLI::IsMember({"sgd", "adam"}));
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"concentration distribution learning toolkit"};
  app.require_subcommand(1);

  CLI::App* train_cmd = app.add_subcommand("train", "fit an evidence model on a dataset");
  train_cmd->add_option("--dataset", o.dataset, "dataset CSV")->required();
  train_cmd->add_option("--protocol", o.protocol, "target interpretation")
      ->check(CLI::IsMember({"hide-last", "native-cd"}));
  add_network_flags(train_cmd, o);
  train_cmd->add_option("--out", o.out, "output directory");

  CLI::App* predict_cmd = app.add_subcommand("predict", "recover concentration distributions");
  predict_cmd->add_option("--model", o.model, "model file")->required();
  predict_cmd->add_option("--dataset", o.dataset, "dataset CSV (features are used)")
      ->required();
  predict_cmd->add_option("--out", o.out, "output directory");
  predict_cmd->add_option("--decode", o.decode, "evidence decoding: confidence | anchored")
      ->check(CLI::IsMember({"confidence", "anchored"}));

  CLI::App* eval_cmd = app.add_subcommand("eval", "compare two distribution files");
  eval_cmd->add_option("--truth", o.truth, "ground-truth file")->required();
  eval_cmd->add_option("--pred", o.pred, "prediction file")->required();

  CLI::App* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation");
  cv_cmd->add_option("--dataset", o.dataset, "dataset CSV")->required();
  cv_cmd->add_option("--protocol", o.protocol, "target interpretation")
      ->check(CLI::IsMember({"hide-last", "native-cd"}));
  cv_cmd->add_option("--folds", o.folds, "fold count")->check(CLI::Range(2, 1000000));
  add_network_flags(cv_cmd, o);
  cv_cmd->add_flag("--baseline", o.baseline, "also run the noise-append predictor");
  cv_cmd->add_option("--out", o.out, "output directory");

  CLI::App* build_cmd = app.add_subcommand("build-cdl", "ratings to concentration rows");
  build_cmd->add_option("--dataset", o.dataset, "ratings CSV")->required();
  build_cmd->add_option("--scale-max", o.scale_max, "override the rating scale upper bound")
      ->check(CLI::PositiveNumber);
  build_cmd->add_option("--out", o.out, "output directory");

  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--n", o.synth_n, "instances")->check(CLI::Range(10, 100000000));
  synth_cmd->add_option("--m", o.synth_m, "features")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--c", o.synth_c, "classes")->check(CLI::Range(2, 1000000));
  synth_cmd->add_option("--seed", o.seed, "generator seed");
  synth_cmd->add_option("--out", o.out, "output directory");

  CLI::App* report_cmd = app.add_subcommand("report", "merge cv reports into rank tables");
  report_cmd->add_option("inputs", o.inputs, "cv_report.tsv files")->required();
  report_cmd->add_option("--cd", o.critical_difference,
                         "critical difference to annotate (e.g. 2.3265)");
  report_cmd->add_option("--out", o.out, "output directory");

  std::string config_path;
  const std::vector<CLI::App*> subcommands = {train_cmd, predict_cmd, eval_cmd, cv_cmd,
                                              build_cmd,  synth_cmd,   report_cmd};
  for (CLI::App* cmd : subcommands) {
    cmd->add_option("--config", config_path, "key=value file; explicit flags win");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (!config_path.empty()) {
    for (CLI::App* cmd : subcommands) {
      if (!cmd->parsed()) continue;
      try {
        apply_config(*cmd, config_path);
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
      }
    }
  }

  try {
    if (train_cmd->parsed()) return do_train(o);
    if (predict_cmd->parsed()) return do_predict(o);
    if (eval_cmd->parsed()) return do_eval(o);
    if (cv_cmd->parsed()) return do_cv(o);
    if (build_cmd->parsed()) return do_build_cdl(o);
    if (synth_cmd->parsed()) return do_synth(o);
    if (report_cmd->parsed()) return do_report(o);
  } catch (const cdl::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const cdl::DivergenceError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const cdl::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
