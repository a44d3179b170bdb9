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
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <random>
#include <thread>
#include <vector>

#include "npers/dataset.hpp"
#include "npers/errors.hpp"
#include "npers/init.hpp"
#include "npers/measures.hpp"
#include "npers/mlp.hpp"
#include "npers/stats.hpp"

namespace npers {

namespace detail {

// Runs f(i) for i in [0, n) on up to `threads` workers. Each index writes
// only its own output slot, so results do not depend on the thread count.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&f, n, t, threads] {
      for (std::size_t i = t; i < n; i += threads) f(i);
    });
  }
}

inline std::uint64_t run_seed(std::uint64_t seed, std::size_t run, std::uint64_t salt) {
  std::seed_seq seq{seed, static_cast<std::uint64_t>(run), salt};
  std::uint64_t out[1];
  seq.generate(out, out + 1);
  return out[0];
}

}  // namespace detail

/// Settings of the perceptron regime experiment.
struct RegimeOptions {
  DatasetOptions data{1000, 40, 10, 8, 3.0, 1.0, 0, {}};
  int epochs = 10;
  std::size_t batch_size = 100;
  double trained_eta = 0.5;
  double diverging_eta = 50.0;
  InitScheme init = InitScheme::xavier_uniform();
  double p = 2.0;
  unsigned threads = 1;
};

/// Per-run neural persistence of one category together with its empirical
/// lower bound.
struct RegimeSample {
  std::string label;
  std::vector<double> np;
  std::vector<double> lower_bound;
  /// Test accuracy of trained categories; empty for random matrices.
  std::vector<double> accuracy;

  stats::Summary summary() const { return stats::summarize(np); }
};

struct RegimeResult {
  std::vector<RegimeSample> samples;  // trained, diverging, gaussian, uniform

  const RegimeSample& get(const std::string& label) const {
    for (const auto& s : samples) {
      if (s.label == label) return s;
    }
    throw InvalidArgument("no regime labelled '" + label + "'");
  }
};

/// Neural persistence of perceptrons (no hidden layer) trained on blobs,
/// the same perceptrons trained with a learning rate that makes the weights
/// blow up, and random Gaussian and uniform matrices of the same shape. The
/// layer is analysed standalone.
inline RegimeResult regime_experiment(int runs, std::uint64_t seed,
                                      const RegimeOptions& options = {}) {
  if (runs < 10) throw InvalidArgument("the regime experiment needs at least 10 runs");
  DatasetOptions data_options = options.data;
  data_options.seed = seed;
  const auto data = make_blobs(data_options);
  const MlpSpec spec{{data.dims, data.classes}};
  const auto n = static_cast<std::size_t>(runs);

  RegimeResult result;
  for (const char* label : {"trained", "diverging", "gaussian", "uniform"}) {
    result.samples.push_back({label, std::vector<double>(n), std::vector<double>(n), {}});
  }
  result.samples[0].accuracy.resize(n);
  result.samples[1].accuracy.resize(n);

  auto measure = [&](RegimeSample& sample, std::size_t run, const WeightedBipartiteLayer& layer) {
    const double gmax = layer.max_abs_weight();
    sample.np[run] = neural_persistence(compute_diagram(layer, gmax), options.p).value;
    sample.lower_bound[run] = empirical_bounds(layer, gmax, options.p).lower;
  };

  detail::parallel_for(n, options.threads, [&](std::size_t run) {
    for (int category = 0; category < 2; ++category) {
      TrainConfig config;
      config.learning_rate = category == 0 ? options.trained_eta : options.diverging_eta;
      config.epochs = options.epochs;
      config.batch_size = options.batch_size;
      config.seed = detail::run_seed(seed, run, 1);
      config.keep_snapshots = false;
      config.snapshot_interval = 4 * std::max(1, options.epochs);
      auto trained = train(spec, options.init, data, config);
      measure(result.samples[static_cast<std::size_t>(category)], run,
              trained.model.snapshot(0).layers.front());
      result.samples[static_cast<std::size_t>(category)].accuracy[run] =
          trained.model.evaluate(data, data.test).second;
    }
    const auto gaussian = init_weights(spec, InitScheme::gaussian(1.0), detail::run_seed(seed, run, 2));
    measure(result.samples[2], run, gaussian.layers.front());
    const auto uniform = init_weights(spec, InitScheme::uniform(-1.0, 1.0), detail::run_seed(seed, run, 3));
    measure(result.samples[3], run, uniform.layers.front());
  });
  return result;
}

/// Settings of the depth experiment: networks of `depth` hidden layers of a
/// fixed width trained on blobs for a fixed budget.
struct DepthOptions {
  DatasetOptions data{1000, 20, 4, 4, 3.0, 1.0, 0, {}};
  int epochs = 15;
  std::size_t batch_size = 32;
  double learning_rate = 0.0003;
  OptimizerConfig optimizer{OptimizerConfig::Kind::adam, 0.9, 0.999, 1e-8};
  InitScheme init = InitScheme::xavier();
  double p = 2.0;
  unsigned threads = 1;
};

struct DepthResult {
  std::size_t depth = 0;
  std::vector<double> values;  // final mean normalised persistence per run
  stats::Summary summary;

  double dispersion() const noexcept { return summary.iqr(); }
};

/// Spread of the final mean normalised persistence over runs, per depth.
inline std::vector<DepthResult> depth_variability(std::size_t width,
                                                  std::span<const std::size_t> depths, int runs,
                                                  std::uint64_t seed,
                                                  const DepthOptions& options = {}) {
  if (width == 0) throw InvalidArgument("width must be positive");
  if (runs < 1) throw InvalidArgument("runs must be >= 1");
  DatasetOptions data_options = options.data;
  data_options.seed = seed;
  const auto data = make_blobs(data_options);
  const auto n = static_cast<std::size_t>(runs);

  std::vector<DepthResult> out;
  for (std::size_t depth : depths) {
    if (depth < 1) throw InvalidArgument("depth must be >= 1");
    MlpSpec spec;
    spec.layer_sizes.push_back(data.dims);
    spec.layer_sizes.insert(spec.layer_sizes.end(), depth, width);
    spec.layer_sizes.push_back(data.classes);

    DepthResult r;
    r.depth = depth;
    r.values.resize(n);
    detail::parallel_for(n, options.threads, [&](std::size_t run) {
      TrainConfig config;
      config.learning_rate = options.learning_rate;
      config.epochs = options.epochs;
      config.batch_size = options.batch_size;
      config.optimizer = options.optimizer;
      config.seed = detail::run_seed(seed, run, 10);
      config.keep_snapshots = false;
      config.snapshot_interval = 4 * std::max(1, options.epochs);
      const auto trained = train(spec, options.init, data, config);
      r.values[run] = mean_normalized_neural_persistence(trained.model.snapshot(0), options.p);
    });
    r.summary = stats::summarize(r.values);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace npers
