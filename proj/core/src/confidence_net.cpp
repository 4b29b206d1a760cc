#include "cdl/confidence_net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "cdl/errors.hpp"
#include "cdl/rng.hpp"

namespace cdl {

namespace {

void check_config(const NetworkConfig& cfg, int n) {
  if (cfg.input_dim < 1 || cfg.output_dim < 1) {
    throw ValidationError("network config: dims must be >= 1");
  }
  for (int h : cfg.hidden_dims) {
    if (h < 1) throw ValidationError("network config: hidden dims must be >= 1");
  }
  if (!(cfg.learning_rate > 0.0)) {
    throw ValidationError("network config: learning rate must be > 0");
  }
  if (cfg.epochs < 1) throw ValidationError("network config: epochs must be >= 1");
  if (cfg.batch_size < 1 || cfg.batch_size > n) {
    throw ValidationError("network config: batch size must be in [1, n], got " +
                          std::to_string(cfg.batch_size) + " with n=" + std::to_string(n));
  }
}

std::vector<double> standardize(const ConfidenceModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.config().input_dim) {
    throw ValidationError("forward: expected " + std::to_string(model.config().input_dim) +
                          " features, got " + std::to_string(x.size()));
  }
  std::vector<double> out(x.size());
  const auto& mean = model.feature_mean();
  const auto& std_dev = model.feature_std();
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (x[i] - mean[i]) / std_dev[i];
  }
  return out;
}

struct Workspace {
  std::vector<std::vector<double>> pre;    // pre-activation per layer
  std::vector<std::vector<double>> act;    // act[0] = input, act[l+1] = layer l output
  std::vector<std::vector<double>> delta;  // dL/d(pre) per layer

  void resize(const std::vector<Layer>& layers) {
    pre.resize(layers.size());
    delta.resize(layers.size());
    act.resize(layers.size() + 1);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      pre[l].resize(layers[l].bias.size());
      delta[l].resize(layers[l].bias.size());
      act[l + 1].resize(layers[l].bias.size());
    }
  }
};

/// Affine chain with hidden activations; the final layer's pre-activation is
/// left in ws.pre.back() and copied to ws.act.back() unactivated.
void run_affine_chain(const std::vector<Layer>& layers, Activation hidden,
                      std::span<const double> x, Workspace& ws) {
  ws.act[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    const std::vector<double>& in = ws.act[l];
    std::vector<double>& z = ws.pre[l];
    for (std::size_t o = 0; o < layer.bias.size(); ++o) {
      double acc = layer.bias[o];
      const auto wrow = layer.weights.row(o);
      for (std::size_t i = 0; i < in.size(); ++i) acc += wrow[i] * in[i];
      z[o] = acc;
    }
    std::vector<double>& a = ws.act[l + 1];
    if (l + 1 == layers.size()) {
      a = z;  // head activation applied by the caller
    } else if (hidden == Activation::kTanh) {
      for (std::size_t o = 0; o < z.size(); ++o) a[o] = std::tanh(z[o]);
    } else {
      for (std::size_t o = 0; o < z.size(); ++o) a[o] = z[o] > 0.0 ? z[o] : 0.0;
    }
  }
}

/// Backpropagate from dL/d(final pre-activation) already stored in
/// ws.delta.back(); accumulates parameter gradients into grads.
void accumulate_gradients(const std::vector<Layer>& layers, Activation hidden,
                          Workspace& ws, std::vector<Layer>& grads) {
  for (std::size_t l = layers.size(); l-- > 0;) {
    const std::vector<double>& dz = ws.delta[l];
    const std::vector<double>& in = ws.act[l];
    Layer& g = grads[l];
    for (std::size_t o = 0; o < dz.size(); ++o) {
      const double d = dz[o];
      g.bias[o] += d;
      auto grow = g.weights.row(o);
      for (std::size_t i = 0; i < in.size(); ++i) grow[i] += d * in[i];
    }
    if (l == 0) break;
    std::vector<double>& prev = ws.delta[l - 1];
    const std::vector<double>& a_prev = ws.act[l];  // post-activation of layer l-1
    std::fill(prev.begin(), prev.end(), 0.0);
    for (std::size_t o = 0; o < dz.size(); ++o) {
      const double d = dz[o];
      const auto wrow = layers[l].weights.row(o);
      for (std::size_t i = 0; i < prev.size(); ++i) prev[i] += wrow[i] * d;
    }
    if (hidden == Activation::kTanh) {
      for (std::size_t i = 0; i < prev.size(); ++i) prev[i] *= 1.0 - a_prev[i] * a_prev[i];
    } else {
      for (std::size_t i = 0; i < prev.size(); ++i) {
        prev[i] = ws.pre[l - 1][i] > 0.0 ? prev[i] : 0.0;
      }
    }
  }
}

enum class Head { kEvidenceRelu, kSoftmax };

void apply_softmax(std::span<const double> z, std::vector<double>& out) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  out.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - zmax);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
}

/// Loss at the head plus dL/d(final pre-activation) written into dz.
double head_loss_and_delta(Head head, std::span<const double> z_out,
                           const LabelDistribution& y, std::vector<double>& dz,
                           std::vector<double>& scratch) {
  const std::size_t c = z_out.size();
  dz.resize(c);
  if (head == Head::kEvidenceRelu) {
    std::vector<double> alpha(c);
    for (std::size_t i = 0; i < c; ++i) {
      alpha[i] = (z_out[i] > 0.0 ? z_out[i] : 0.0) + 1.0;
    }
    DirichletParams params(std::move(alpha));
    const LossBreakdown loss = amse_loss(params, y);
    const std::vector<double> g = amse_gradient(params, y);
    for (std::size_t i = 0; i < c; ++i) {
      dz[i] = z_out[i] > 0.0 ? g[i] : 0.0;  // subgradient at 0 is 0
    }
    return loss.total;
  }
  apply_softmax(z_out, scratch);
  double loss = 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    const double diff = scratch[i] - y[i];
    loss += diff * diff;
    dot += 2.0 * diff * scratch[i];
  }
  for (std::size_t i = 0; i < c; ++i) {
    dz[i] = scratch[i] * (2.0 * (scratch[i] - y[i]) - dot);
  }
  return loss;
}

struct OptimizerState {
  std::vector<Layer> m;
  std::vector<Layer> v;
  long step = 0;
};

std::vector<Layer> zero_like(const std::vector<Layer>& layers) {
  std::vector<Layer> out;
  out.reserve(layers.size());
  for (const Layer& l : layers) {
    out.push_back(Layer{Matrix(l.weights.rows(), l.weights.cols()),
                        std::vector<double>(l.bias.size(), 0.0)});
  }
  return out;
}

NetworkConfig resolve_config(const NetworkConfig& cfg) {
  NetworkConfig out = cfg;
  if (out.hidden_dims.empty()) {
    out.hidden_dims = {std::max(64, 4 * out.output_dim)};
  }
  return out;
}

std::vector<Layer> init_layers(const NetworkConfig& cfg, RandomStream& stream) {
  std::vector<int> dims;
  dims.push_back(cfg.input_dim);
  dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
  dims.push_back(cfg.output_dim);

  std::vector<Layer> layers;
  layers.reserve(dims.size() - 1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Layer layer{Matrix(fan_out, fan_in), std::vector<double>(fan_out, 0.0)};
    for (auto& w : layer.weights.data()) w = stream.uniform(-limit, limit);
    layers.push_back(std::move(layer));
  }
  return layers;
}

ConfidenceModel train_impl(const Dataset& dataset, const NetworkConfig& config, Head head) {
  if (dataset.target_kind != TargetKind::kLabel) {
    throw ValidationError("train: targets must be label distributions");
  }
  const int n = dataset.n();
  NetworkConfig cfg = resolve_config(config);
  check_config(cfg, n);
  if (dataset.m() != cfg.input_dim) {
    throw ValidationError("train: feature width " + std::to_string(dataset.m()) +
                          " != config input_dim " + std::to_string(cfg.input_dim));
  }
  if (static_cast<int>(dataset.targets.cols()) != cfg.output_dim) {
    throw ValidationError("train: target width " + std::to_string(dataset.targets.cols()) +
                          " != config output_dim " + std::to_string(cfg.output_dim));
  }

  // Per-column z-score statistics from the training data only.
  std::vector<double> mean(cfg.input_dim, 0.0);
  std::vector<double> std_dev(cfg.input_dim, 0.0);
  for (int r = 0; r < n; ++r) {
    const auto row = dataset.features.row(r);
    for (int j = 0; j < cfg.input_dim; ++j) mean[j] += row[j];
  }
  for (double& v : mean) v /= n;
  for (int r = 0; r < n; ++r) {
    const auto row = dataset.features.row(r);
    for (int j = 0; j < cfg.input_dim; ++j) {
      const double d = row[j] - mean[j];
      std_dev[j] += d * d;
    }
  }
  for (double& v : std_dev) {
    v = std::sqrt(v / n);
    if (v < 1e-12) v = 1.0;  // constant column
  }

  RandomStream stream(cfg.seed);
  std::vector<Layer> layers = init_layers(cfg, stream);

  std::vector<LabelDistribution> targets;
  targets.reserve(n);
  for (int r = 0; r < n; ++r) {
    const auto row = dataset.targets.row(r);
    targets.emplace_back(std::vector<double>(row.begin(), row.end()));
  }
  Matrix features_std(n, cfg.input_dim);
  for (int r = 0; r < n; ++r) {
    const auto row = dataset.features.row(r);
    for (int j = 0; j < cfg.input_dim; ++j) {
      features_std(r, j) = (row[j] - mean[j]) / std_dev[j];
    }
  }

  Workspace ws;
  ws.resize(layers);
  std::vector<Layer> grads = zero_like(layers);
  OptimizerState opt{zero_like(layers), zero_like(layers), 0};
  std::vector<double> scratch;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<std::pair<int, double>> history;
  history.reserve(cfg.epochs);
  double best_loss = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    stream.shuffle(order);
    double epoch_loss = 0.0;

    for (int start = 0; start < n; start += cfg.batch_size) {
      const int batch_n = std::min(cfg.batch_size, n - start);
      for (Layer& g : grads) {
        std::fill(g.weights.data().begin(), g.weights.data().end(), 0.0);
        std::fill(g.bias.begin(), g.bias.end(), 0.0);
      }
      for (int b = 0; b < batch_n; ++b) {
        const int idx = order[start + b];
        run_affine_chain(layers, cfg.hidden_activation, features_std.row(idx), ws);
        epoch_loss += head_loss_and_delta(head, ws.pre.back(), targets[idx],
                                          ws.delta.back(), scratch);
        accumulate_gradients(layers, cfg.hidden_activation, ws, grads);
      }
      const double scale = 1.0 / static_cast<double>(batch_n);
      ++opt.step;
      for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& w = layers[l].weights.data();
        auto& gw = grads[l].weights.data();
        auto& mw = opt.m[l].weights.data();
        auto& vw = opt.v[l].weights.data();
        auto update = [&](double& param, double raw_grad, double& m1, double& m2) {
          double g = raw_grad * scale + cfg.weight_decay * param;
          if (cfg.optimizer == Optimizer::kSgd) {
            param -= cfg.learning_rate * g;
            return;
          }
          m1 = cfg.adam_beta1 * m1 + (1.0 - cfg.adam_beta1) * g;
          m2 = cfg.adam_beta2 * m2 + (1.0 - cfg.adam_beta2) * g * g;
          const double m_hat = m1 / (1.0 - std::pow(cfg.adam_beta1, opt.step));
          const double v_hat = m2 / (1.0 - std::pow(cfg.adam_beta2, opt.step));
          param -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
        };
        for (std::size_t i = 0; i < w.size(); ++i) update(w[i], gw[i], mw[i], vw[i]);
        for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
          update(layers[l].bias[i], grads[l].bias[i], opt.m[l].bias[i], opt.v[l].bias[i]);
        }
      }
    }

    epoch_loss /= n;
    if (!std::isfinite(epoch_loss)) {
      throw DivergenceError("training diverged: non-finite loss at epoch " +
                                std::to_string(epoch),
                            epoch);
    }
    history.emplace_back(epoch, epoch_loss);
    if (cfg.early_stop_patience > 0) {
      if (epoch_loss < best_loss) {
        best_loss = epoch_loss;
        stall = 0;
      } else if (++stall >= cfg.early_stop_patience) {
        break;
      }
    }
  }

  return ConfidenceModel(std::move(cfg), std::move(layers), std::move(mean),
                         std::move(std_dev), std::move(history));
}

std::string activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw ValidationError("unknown activation '" + s + "'");
}

std::string optimizer_name(Optimizer o) { return o == Optimizer::kSgd ? "sgd" : "adam"; }

Optimizer optimizer_from(const std::string& s) {
  if (s == "sgd") return Optimizer::kSgd;
  if (s == "adam") return Optimizer::kAdam;
  throw ValidationError("unknown optimizer '" + s + "'");
}

}  // namespace

ConfidenceModel::ConfidenceModel(NetworkConfig config, std::vector<Layer> layers)
    : ConfidenceModel(std::move(config), std::move(layers), {}, {}, {}) {}

ConfidenceModel::ConfidenceModel(NetworkConfig config, std::vector<Layer> layers,
                                 std::vector<double> feature_mean,
                                 std::vector<double> feature_std,
                                 std::vector<std::pair<int, double>> training_history)
    : config_(std::move(config)),
      layers_(std::move(layers)),
      feature_mean_(std::move(feature_mean)),
      feature_std_(std::move(feature_std)),
      training_history_(std::move(training_history)) {
  if (layers_.empty()) throw ValidationError("model needs at least one layer");
  if (feature_mean_.empty()) feature_mean_.assign(config_.input_dim, 0.0);
  if (feature_std_.empty()) feature_std_.assign(config_.input_dim, 1.0);
  if (static_cast<int>(feature_mean_.size()) != config_.input_dim ||
      static_cast<int>(feature_std_.size()) != config_.input_dim) {
    throw ValidationError("standardization statistics width != input_dim");
  }
  std::size_t expect_in = static_cast<std::size_t>(config_.input_dim);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.weights.cols() != expect_in || layer.weights.rows() != layer.bias.size()) {
      throw ValidationError("layer " + std::to_string(l) + " shape breaks the chain");
    }
    expect_in = layer.weights.rows();
  }
  if (expect_in != static_cast<std::size_t>(config_.output_dim)) {
    throw ValidationError("final layer width != output_dim");
  }
}

EvidenceVector forward(const ConfidenceModel& model, std::span<const double> x) {
  std::vector<double> z = final_preactivation(model, x);
  for (double& v : z) v = v > 0.0 ? v : 0.0;
  return EvidenceVector(std::move(z));
}

DirichletParams predict_alpha(const ConfidenceModel& model, std::span<const double> x) {
  return DirichletParams::from_evidence(forward(model, x));
}

std::vector<double> final_preactivation(const ConfidenceModel& model,
                                        std::span<const double> x) {
  const std::vector<double> x_std = standardize(model, x);
  Workspace ws;
  ws.resize(model.layers());
  run_affine_chain(model.layers(), model.config().hidden_activation, x_std, ws);
  return ws.pre.back();
}

std::vector<Layer> backward(const ConfidenceModel& model, std::span<const double> x,
                            const LabelDistribution& y) {
  if (static_cast<int>(y.size()) != model.config().output_dim) {
    throw ValidationError("backward: target width != output_dim");
  }
  const std::vector<double> x_std = standardize(model, x);
  Workspace ws;
  ws.resize(model.layers());
  run_affine_chain(model.layers(), model.config().hidden_activation, x_std, ws);
  std::vector<double> scratch;
  head_loss_and_delta(Head::kEvidenceRelu, ws.pre.back(), y, ws.delta.back(), scratch);
  std::vector<Layer> grads = zero_like(model.layers());
  accumulate_gradients(model.layers(), model.config().hidden_activation, ws, grads);
  return grads;
}

ConfidenceModel train(const Dataset& dataset, const NetworkConfig& config) {
  return train_impl(dataset, config, Head::kEvidenceRelu);
}

ConfidenceModel train_softmax_baseline(const Dataset& dataset, const NetworkConfig& config) {
  return train_impl(dataset, config, Head::kSoftmax);
}

LabelDistribution predict_label_softmax(const ConfidenceModel& model,
                                        std::span<const double> x) {
  const std::vector<double> z = final_preactivation(model, x);
  std::vector<double> p;
  apply_softmax(z, p);
  return LabelDistribution(std::move(p));
}

void save_model(const ConfidenceModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "cdl-model";
  j["version"] = 1;
  const NetworkConfig& c = model.config();
  j["config"] = {
      {"input_dim", c.input_dim},
      {"output_dim", c.output_dim},
      {"hidden_dims", c.hidden_dims},
      {"hidden_activation", activation_name(c.hidden_activation)},
      {"seed", c.seed},
      {"learning_rate", c.learning_rate},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"optimizer", optimizer_name(c.optimizer)},
      {"adam_beta1", c.adam_beta1},
      {"adam_beta2", c.adam_beta2},
      {"adam_eps", c.adam_eps},
      {"weight_decay", c.weight_decay},
      {"early_stop_patience", c.early_stop_patience},
  };
  j["feature_mean"] = model.feature_mean();
  j["feature_std"] = model.feature_std();
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& l : model.layers()) {
    layers.push_back({{"out", l.weights.rows()},
                      {"in", l.weights.cols()},
                      {"weights", l.weights.data()},
                      {"bias", l.bias}});
  }
  j["layers"] = std::move(layers);
  nlohmann::json history = nlohmann::json::array();
  for (const auto& [epoch, loss] : model.training_history()) {
    history.push_back({epoch, loss});
  }
  j["history"] = std::move(history);

  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ConfidenceModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("model file '" + path.string() + "': " + e.what());
  }
  try {
    if (j.value("format", "") != "cdl-model") {
      throw ValidationError("model file '" + path.string() + "': not a cdl model");
    }
    const auto& jc = j.at("config");
    NetworkConfig c;
    c.input_dim = jc.at("input_dim").get<int>();
    c.output_dim = jc.at("output_dim").get<int>();
    c.hidden_dims = jc.at("hidden_dims").get<std::vector<int>>();
    c.hidden_activation = activation_from(jc.at("hidden_activation").get<std::string>());
    c.seed = jc.at("seed").get<std::uint64_t>();
    c.learning_rate = jc.at("learning_rate").get<double>();
    c.epochs = jc.at("epochs").get<int>();
    c.batch_size = jc.at("batch_size").get<int>();
    c.optimizer = optimizer_from(jc.at("optimizer").get<std::string>());
    c.adam_beta1 = jc.at("adam_beta1").get<double>();
    c.adam_beta2 = jc.at("adam_beta2").get<double>();
    c.adam_eps = jc.at("adam_eps").get<double>();
    c.weight_decay = jc.value("weight_decay", 0.0);
    c.early_stop_patience = jc.value("early_stop_patience", 0);

    std::vector<Layer> layers;
    for (const auto& jl : j.at("layers")) {
      const auto rows = jl.at("out").get<std::size_t>();
      const auto cols = jl.at("in").get<std::size_t>();
      Layer layer{Matrix(rows, cols), jl.at("bias").get<std::vector<double>>()};
      const auto weights = jl.at("weights").get<std::vector<double>>();
      if (weights.size() != rows * cols) {
        throw ValidationError("model file '" + path.string() + "': weight count mismatch");
      }
      layer.weights.data() = weights;
      layers.push_back(std::move(layer));
    }

    std::vector<std::pair<int, double>> history;
    for (const auto& jh : j.at("history")) {
      history.emplace_back(jh.at(0).get<int>(), jh.at(1).get<double>());
    }
    return ConfidenceModel(std::move(c), std::move(layers),
                           j.at("feature_mean").get<std::vector<double>>(),
                           j.at("feature_std").get<std::vector<double>>(),
                           std::move(history));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("model file '" + path.string() + "': " + e.what());
  }
}

}  // namespace cdl
