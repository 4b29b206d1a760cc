#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "cdl/dataset.hpp"
#include "cdl/dirichlet.hpp"
#include "cdl/distributions.hpp"
#include "cdl/matrix.hpp"

namespace cdl {

enum class Activation { kRelu, kTanh };
enum class Optimizer { kSgd, kAdam };

struct NetworkConfig {
  int input_dim = 0;
  int output_dim = 0;
  /// Empty means one hidden layer of width max(64, 4 * output_dim).
  std::vector<int> hidden_dims;
  Activation hidden_activation = Activation::kTanh;
  std::uint64_t seed = 0;
  double learning_rate = 1e-3;
  int epochs = 500;
  int batch_size = 32;
  Optimizer optimizer = Optimizer::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;      // 0 disables
  int early_stop_patience = 0;    // 0 disables

  bool operator==(const NetworkConfig&) const = default;
};

struct Layer {
  Matrix weights;  // out x in, row-major
  std::vector<double> bias;
};

/// Feed-forward evidence network e = f(x | theta). The output layer is a
/// ReLU, so evidence is non-negative for every input. Feature columns are
/// standardized with statistics captured at training time; hand-built models
/// get identity statistics. Immutable once constructed.
class ConfidenceModel {
 public:
  ConfidenceModel() = default;
  ConfidenceModel(NetworkConfig config, std::vector<Layer> layers);
  ConfidenceModel(NetworkConfig config, std::vector<Layer> layers,
                  std::vector<double> feature_mean, std::vector<double> feature_std,
                  std::vector<std::pair<int, double>> training_history);

  const NetworkConfig& config() const noexcept { return config_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const std::vector<double>& feature_mean() const noexcept { return feature_mean_; }
  const std::vector<double>& feature_std() const noexcept { return feature_std_; }
  /// (epoch, mean AMSE loss) per epoch.
  const std::vector<std::pair<int, double>>& training_history() const noexcept {
    return training_history_;
  }

 private:
  NetworkConfig config_;
  std::vector<Layer> layers_;
  std::vector<double> feature_mean_;
  std::vector<double> feature_std_;
  std::vector<std::pair<int, double>> training_history_;
};

/// Evidence for one feature vector; deterministic given the model.
EvidenceVector forward(const ConfidenceModel& model, std::span<const double> x);

/// alpha = forward(x) + 1 entrywise.
DirichletParams predict_alpha(const ConfidenceModel& model, std::span<const double> x);

/// Final-layer pre-activation (the affine chain without the output ReLU).
std::vector<double> final_preactivation(const ConfidenceModel& model,
                                        std::span<const double> x);

/// Per-parameter gradients of amse_loss(predict_alpha(x), y), same shapes as
/// model.layers(). ReLU subgradient at exactly 0 is taken as 0.
std::vector<Layer> backward(const ConfidenceModel& model, std::span<const double> x,
                            const LabelDistribution& y);

/// Train the evidence network on a dataset with label-distribution targets.
/// Deterministic given config.seed: initialization, shuffling and updates all
/// come from the one seeded stream. Throws DivergenceError (with the epoch)
/// if the loss goes non-finite.
ConfidenceModel train(const Dataset& dataset, const NetworkConfig& config);

/// Same architecture and loop with a softmax head trained on plain MSE.
/// This is the naive comparison predictor wrapped by the noise-append
/// protocol in the harness.
ConfidenceModel train_softmax_baseline(const Dataset& dataset, const NetworkConfig& config);

/// Softmax of the final pre-activation; prediction path of the baseline.
LabelDistribution predict_label_softmax(const ConfidenceModel& model,
                                        std::span<const double> x);

/// Structured-text round trip (17-significant-digit exact).
void save_model(const ConfidenceModel& model, const std::filesystem::path& path);
ConfidenceModel load_model(const std::filesystem::path& path);

}  // namespace cdl
