/**
 * Copyright 2026 The npers Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "npers/dataset.hpp"
#include "npers/errors.hpp"
#include "npers/init.hpp"
#include "npers/layer.hpp"
#include "npers/measures.hpp"
#include "npers/metrics.hpp"

namespace npers {

/// Fully connected network with ReLU hidden layers and a softmax
/// cross-entropy output. Layer k maps sizes[k] inputs to sizes[k+1] outputs;
/// its weight matrix is stored row-major as (output, input).
class Mlp {
 public:
  struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
  };

  Mlp(MlpSpec spec, const NetworkSnapshot& init) : spec_(std::move(spec)) {
    spec_.validate();
    if (init.layers.size() != spec_.weight_layers()) {
      throw InvalidArgument("initial snapshot has the wrong number of layers");
    }
    for (std::size_t k = 0; k < init.layers.size(); ++k) {
      const auto& layer = init.layers[k];
      if (layer.is_sparse() || layer.in_count() != spec_.layer_sizes[k] ||
          layer.out_count() != spec_.layer_sizes[k + 1]) {
        throw InvalidArgument("initial layer " + std::to_string(k) + " does not match the spec");
      }
      const auto values = layer.dense_values();
      weights_.emplace_back(values.begin(), values.end());
      biases_.emplace_back(layer.out_count(), 0.0);
    }
  }

  const MlpSpec& spec() const noexcept { return spec_; }
  std::size_t layer_count() const noexcept { return weights_.size(); }
  std::vector<double>& weights(std::size_t k) { return weights_[k]; }
  const std::vector<double>& weights(std::size_t k) const { return weights_[k]; }
  std::vector<double>& biases(std::size_t k) { return biases_[k]; }
  const std::vector<double>& biases(std::size_t k) const { return biases_[k]; }

  NetworkSnapshot snapshot(std::int64_t step) const {
    NetworkSnapshot net;
    net.step = step;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      net.layers.push_back(WeightedBipartiteLayer::dense(spec_.layer_sizes[k + 1],
                                                         spec_.layer_sizes[k], weights_[k]));
    }
    return net;
  }

  Gradients zero_gradients() const {
    Gradients g;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      g.weights.emplace_back(weights_[k].size(), 0.0);
      g.biases.emplace_back(biases_[k].size(), 0.0);
    }
    return g;
  }

  /// Mean cross-entropy over `batch`; accumulates the mean gradient into
  /// `grad`, which must be zeroed by the caller.
  double loss_and_gradients(const SyntheticDataset& data, std::span<const std::size_t> batch,
                            Gradients& grad) const {
    const std::size_t L = weights_.size();
    std::vector<std::vector<double>> act(L + 1);
    std::vector<double> delta, next_delta;
    double total = 0.0;
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (std::size_t idx : batch) {
      forward(data.row(idx), act);
      total += softmax_in_place(act[L], data.labels[idx]);
      // Gradient of the cross-entropy wrt the logits: p - onehot(label).
      delta.assign(act[L].begin(), act[L].end());
      delta[static_cast<std::size_t>(data.labels[idx])] -= 1.0;
      for (std::size_t k = L; k-- > 0;) {
        const std::size_t in = spec_.layer_sizes[k];
        const std::size_t out = spec_.layer_sizes[k + 1];
        const auto& x = act[k];
        auto& gw = grad.weights[k];
        auto& gb = grad.biases[k];
        for (std::size_t o = 0; o < out; ++o) {
          const double d = delta[o] * scale;
          if (d == 0.0) continue;
          gb[o] += d;
          double* row = gw.data() + o * in;
          for (std::size_t i = 0; i < in; ++i) row[i] += d * x[i];
        }
        if (k == 0) break;
        next_delta.assign(in, 0.0);
        const auto& w = weights_[k];
        for (std::size_t o = 0; o < out; ++o) {
          const double d = delta[o];
          if (d == 0.0) continue;
          const double* row = w.data() + o * in;
          for (std::size_t i = 0; i < in; ++i) next_delta[i] += d * row[i];
        }
        for (std::size_t i = 0; i < in; ++i) {
          if (x[i] <= 0.0) next_delta[i] = 0.0;  // ReLU
        }
        delta.swap(next_delta);
      }
    }
    return total * scale;
  }

  /// Mean cross-entropy and accuracy over the given rows.
  std::pair<double, double> evaluate(const SyntheticDataset& data,
                                     std::span<const std::size_t> rows) const {
    if (rows.empty()) return {std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN()};
    std::vector<std::vector<double>> act(weights_.size() + 1);
    double loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t idx : rows) {
      forward(data.row(idx), act);
      auto& out = act.back();
      const auto best = static_cast<int>(std::max_element(out.begin(), out.end()) - out.begin());
      if (best == data.labels[idx]) ++correct;
      loss += softmax_in_place(out, data.labels[idx]);
    }
    const auto n = static_cast<double>(rows.size());
    return {loss / n, static_cast<double>(correct) / n};
  }

  bool all_finite() const noexcept {
    for (const auto& w : weights_) {
      for (double x : w) {
        if (!std::isfinite(x)) return false;
      }
    }
    for (const auto& b : biases_) {
      for (double x : b) {
        if (!std::isfinite(x)) return false;
      }
    }
    return true;
  }

 private:
  void forward(std::span<const double> input, std::vector<std::vector<double>>& act) const {
    const std::size_t L = weights_.size();
    act[0].assign(input.begin(), input.end());
    for (std::size_t k = 0; k < L; ++k) {
      const std::size_t in = spec_.layer_sizes[k];
      const std::size_t out = spec_.layer_sizes[k + 1];
      auto& y = act[k + 1];
      y.assign(out, 0.0);
      const auto& x = act[k];
      for (std::size_t o = 0; o < out; ++o) {
        const double* row = weights_[k].data() + o * in;
        double s = biases_[k][o];
        for (std::size_t i = 0; i < in; ++i) s += row[i] * x[i];
        y[o] = (k + 1 < L) ? std::max(s, 0.0) : s;
      }
    }
  }

  // Replaces logits by probabilities and returns the cross-entropy of `label`.
  static double softmax_in_place(std::vector<double>& z, int label) {
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
      v = std::exp(v - m);
      sum += v;
    }
    const double log_sum = std::log(sum);
    const double ce = -(std::log(z[static_cast<std::size_t>(label)]) - log_sum);
    for (auto& v : z) v /= sum;
    return ce;
  }

  MlpSpec spec_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> biases_;
};

struct OptimizerConfig {
  enum class Kind { sgd, adam };
  Kind kind = Kind::sgd;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  /// Snapshot and trace spacing in quarter epochs.
  int snapshot_interval = 1;
  OptimizerConfig optimizer;
  double np_p = 2.0;
  bool keep_snapshots = true;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw InvalidArgument("learning rate must be positive");
    }
    if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
    if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
    if (snapshot_interval < 1) throw InvalidArgument("snapshot interval must be >= 1");
  }
};

struct TrainResult {
  std::vector<NetworkSnapshot> snapshots;
  /// train_loss, val_loss, val_accuracy, test_accuracy, np_mean_normalized,
  /// weight_pnorm, one sample per recorded quarter epoch.
  TraceTable traces;
  /// Mean minibatch loss of every completed epoch.
  std::vector<double> epoch_losses;
  bool diverged = false;
  std::int64_t diverged_at_step = -1;
  Mlp model;
};

namespace detail {

class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, double lr, const Mlp& model)
      : config_(config), lr_(lr), m_(model.zero_gradients()), v_(model.zero_gradients()) {}

  void step(Mlp& model, const Mlp::Gradients& g) {
    ++t_;
    for (std::size_t k = 0; k < model.layer_count(); ++k) {
      apply(model.weights(k), g.weights[k], m_.weights[k], v_.weights[k]);
      apply(model.biases(k), g.biases[k], m_.biases[k], v_.biases[k]);
    }
  }

 private:
  void apply(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
             std::vector<double>& v) const {
    if (config_.kind == OptimizerConfig::Kind::sgd) {
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr_ * g[i];
      return;
    }
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
    }
  }

  OptimizerConfig config_;
  double lr_;
  Mlp::Gradients m_;
  Mlp::Gradients v_;
  std::int64_t t_ = 0;
};

inline double weight_pnorm(const NetworkSnapshot& net, double p) {
  PNormAccumulator acc(p);
  for (const auto& layer : net.layers) {
    layer.for_each_edge([&acc](std::size_t, std::size_t, double w) { acc.add(std::abs(w)); });
  }
  return acc.result();
}

}  // namespace detail

/// Minibatch training with evaluation every quarter epoch.
///
/// Step 0 records the initial network; step s records the state after s
/// quarter epochs. A non-finite loss or weight marks the run as diverged:
/// the offending update is rolled back and training stops, so every
/// emitted snapshot holds finite weights. Mean normalised persistence of
/// an all-zero network is recorded as NaN.
inline TrainResult train(Mlp model, const SyntheticDataset& data, const TrainConfig& config) {
  config.validate();
  if (data.classes != model.spec().layer_sizes.back()) {
    throw InvalidArgument("dataset has " + std::to_string(data.classes) +
                          " classes but the network has " +
                          std::to_string(model.spec().layer_sizes.back()) + " outputs");
  }
  if (data.dims != model.spec().layer_sizes.front()) {
    throw InvalidArgument("dataset dimension does not match the network input");
  }
  if (data.train.empty()) throw InvalidArgument("training split is empty");

  TrainResult result{{}, {}, {}, false, -1, model};
  std::seed_seq seq{config.seed, std::uint64_t{0x5eed}};
  std::mt19937_64 rng(seq);
  detail::Optimizer optimizer(config.optimizer, config.learning_rate, model);

  auto record = [&](std::int64_t step, double train_loss) {
    if (step % config.snapshot_interval != 0) return;
    const auto [val_loss, val_acc] = model.evaluate(data, data.validation);
    const auto [test_loss, test_acc] = model.evaluate(data, data.test);
    (void)test_loss;
    auto net = model.snapshot(step);
    double np = std::numeric_limits<double>::quiet_NaN();
    if (net.global_max_abs() > 0.0) np = mean_normalized_neural_persistence(net, config.np_p);
    result.traces.add("train_loss", step, train_loss);
    result.traces.add("val_loss", step, val_loss);
    result.traces.add("val_accuracy", step, val_acc);
    result.traces.add("test_accuracy", step, test_acc);
    result.traces.add("np_mean_normalized", step, np);
    result.traces.add("weight_pnorm", step, detail::weight_pnorm(net, config.np_p));
    if (config.keep_snapshots) result.snapshots.push_back(std::move(net));
  };

  record(0, model.evaluate(data, data.train).first);

  std::vector<std::size_t> order = data.train;
  const std::size_t batches = (order.size() + config.batch_size - 1) / config.batch_size;
  for (int epoch = 0; epoch < config.epochs && !result.diverged; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batch = 0;
    for (int quarter = 1; quarter <= 4 && !result.diverged; ++quarter) {
      const std::size_t end = (static_cast<std::size_t>(quarter) * batches + 3) / 4;
      double quarter_loss = 0.0;
      std::size_t quarter_batches = 0;
      for (; batch < end; ++batch) {
        const std::size_t lo = batch * config.batch_size;
        const std::size_t hi = std::min(lo + config.batch_size, order.size());
        auto grad = model.zero_gradients();
        const double loss = model.loss_and_gradients(
            data, std::span<const std::size_t>(order.data() + lo, hi - lo), grad);
        Mlp before = model;
        if (std::isfinite(loss)) optimizer.step(model, grad);
        if (!std::isfinite(loss) || !model.all_finite()) {
          model = std::move(before);
          result.diverged = true;
          result.diverged_at_step = static_cast<std::int64_t>(epoch) * 4 + quarter;
          break;
        }
        quarter_loss += loss;
        epoch_loss += loss;
        ++quarter_batches;
      }
      if (result.diverged) break;
      const double mean_loss = quarter_batches > 0
                                   ? quarter_loss / static_cast<double>(quarter_batches)
                                   : model.evaluate(data, data.train).first;
      record(static_cast<std::int64_t>(epoch) * 4 + quarter, mean_loss);
    }
    if (!result.diverged) result.epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
  }
  result.model = std::move(model);
  return result;
}

inline TrainResult train(const MlpSpec& spec, const InitScheme& init, const SyntheticDataset& data,
                         const TrainConfig& config) {
  return train(Mlp(spec, init_weights(spec, init, config.seed)), data, config);
}

}  // namespace npers
