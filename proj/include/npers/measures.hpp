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
#include <span>
#include <string>
#include <vector>

#include "npers/errors.hpp"
#include "npers/layer.hpp"
#include "npers/persistence.hpp"

namespace npers {

struct NeuralPersistenceValue {
  double value = 0.0;
  double p = 2.0;
  bool normalized = false;
};

struct BoundsPair {
  double lower = 0.0;
  double upper = 0.0;
};

/// Which range the normalisation divides by. `full` uses 1 - 0, the whole
/// transformed-weight interval; `observed` uses the layer's max' - min'.
enum class NormalizationRange { full, observed };

/// How many entries the empirical bound vectors hold. `finite_points` uses
/// the number of finite diagram points (n - essential_count). `vertex_count`
/// uses n itself; its lower bound can exceed the actual value, e.g. on the
/// K(2,2) layer [[1, .5], [.5, .5]].
enum class BoundLength { finite_points, vertex_count };

namespace detail {

inline void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("norm exponent p must be >= 1");
}

/// Accumulates x^p for a p-norm; p = 1 and p = 2 avoid std::pow.
class PNormAccumulator {
 public:
  explicit PNormAccumulator(double p) : p_(p) {}

  void add(double x) {
    if (p_ == 1.0) {
      sum_ += x;
    } else if (p_ == 2.0) {
      sum_ += x * x;
    } else {
      sum_ += std::pow(x, p_);
    }
  }

  void add(double x, std::size_t times) {
    if (times == 0) return;
    PNormAccumulator one(p_);
    one.add(x);
    sum_ += one.sum_ * static_cast<double>(times);
  }

  double result() const {
    if (p_ == 1.0) return sum_;
    if (p_ == 2.0) return std::sqrt(sum_);
    return std::pow(sum_, 1.0 / p_);
  }

 private:
  double p_;
  double sum_ = 0.0;
};

inline double root(double count, double p) { return p == 1.0 ? count : std::pow(count, 1.0 / p); }

inline std::vector<double> sorted_transformed(const WeightedBipartiteLayer& layer,
                                              double global_max) {
  std::vector<double> out;
  out.reserve(layer.edge_count());
  transform_weights(layer, global_max).for_each_edge([&out](std::size_t, std::size_t, double w) {
    out.push_back(w);
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// p-norm of the diagram's persistences.
inline NeuralPersistenceValue neural_persistence(const PersistenceDiagram& diagram,
                                                 double p = 2.0) {
  detail::check_p(p);
  detail::PNormAccumulator acc(p);
  diagram.for_each_included([&acc](const PersistencePoint& pt) { acc.add(pt.persistence()); });
  return {acc.result(), p, false};
}

/// (max' - min') * (n - 1)^(1/p) with n = in_count + out_count.
///
/// Bounds the skip-policy value of a standalone layer (global_max equal to
/// the layer maximum). Inside a larger network max' < 1 and the bound no
/// longer applies to the merges at weights below 1.
inline double theoretical_upper_bound(const WeightedBipartiteLayer& layer, double global_max,
                                      double p = 2.0) {
  detail::check_p(p);
  const auto t = transform_weights(layer, global_max);
  double lo = 1.0;
  double hi = 0.0;
  t.for_each_edge([&](std::size_t, std::size_t, double w) {
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  });
  return (hi - lo) * detail::root(static_cast<double>(layer.vertex_count() - 1), p);
}

/// Lower and upper empirical bounds: the p-norms of 1 - w over the k largest
/// and the k smallest transformed weights. `sorted_ascending` must be in
/// non-descending order.
inline BoundsPair empirical_bounds(std::size_t k, std::span<const double> sorted_ascending,
                                   double p = 2.0) {
  detail::check_p(p);
  if (k > sorted_ascending.size()) {
    throw InvalidArgument("bound length " + std::to_string(k) + " exceeds edge count " +
                          std::to_string(sorted_ascending.size()));
  }
  detail::PNormAccumulator lower(p);
  detail::PNormAccumulator upper(p);
  const std::size_t m = sorted_ascending.size();
  for (std::size_t i = 0; i < k; ++i) {
    lower.add(1.0 - sorted_ascending[m - 1 - i]);
    upper.add(1.0 - sorted_ascending[i]);
  }
  return {lower.result(), upper.result()};
}

/// Empirical bounds of a layer. With BoundLength::finite_points the vector
/// length is the number of finite points the skip-policy diagram holds.
inline BoundsPair empirical_bounds(const WeightedBipartiteLayer& layer, double global_max,
                                   double p = 2.0,
                                   BoundLength length = BoundLength::finite_points) {
  const auto weights = detail::sorted_transformed(layer, global_max);
  std::size_t k = layer.vertex_count();
  if (length == BoundLength::finite_points) {
    k = compute_diagram(layer, global_max, EssentialPolicy::skip).finite_count();
  }
  return empirical_bounds(k, weights, p);
}

/// Neural persistence divided by the layer upper bound evaluated over the
/// full [0, 1] range, i.e. NP / (n - 1)^(1/p). Under the skip policy the
/// result lies in [0, 1].
inline double normalized_neural_persistence(const WeightedBipartiteLayer& layer,
                                            double global_max, double p = 2.0,
                                            EssentialPolicy policy = EssentialPolicy::skip,
                                            NormalizationRange range = NormalizationRange::full) {
  detail::check_p(p);
  const std::size_t n = layer.vertex_count();
  if (n < 2) throw InvalidArgument("normalisation needs at least two vertices");
  const double value = neural_persistence(compute_diagram(layer, global_max, policy), p).value;
  double divisor = detail::root(static_cast<double>(n - 1), p);
  if (range == NormalizationRange::observed) {
    divisor = theoretical_upper_bound(layer, global_max, p);
    if (divisor == 0.0) {
      if (value == 0.0) return 0.0;
      throw InvalidArgument("observed weight range is zero; use the full range");
    }
  }
  return value / divisor;
}

/// Arithmetic mean of the per-layer normalised values, with the weight
/// transformation driven by the network-wide maximum. Layers are summed in
/// index order.
inline double mean_normalized_neural_persistence(
    const NetworkSnapshot& network, double p = 2.0,
    EssentialPolicy policy = EssentialPolicy::skip,
    NormalizationRange range = NormalizationRange::full) {
  if (network.layers.empty()) throw InvalidArgument("network has no layers");
  const double global_max = network.global_max_abs();
  double sum = 0.0;
  for (const auto& layer : network.layers) {
    sum += normalized_neural_persistence(layer, global_max, p, policy, range);
  }
  return sum / static_cast<double>(network.layers.size());
}

/// Everything the report of one layer needs, computed from a single diagram.
struct LayerMeasures {
  std::size_t in_count = 0;
  std::size_t out_count = 0;
  std::size_t finite_points = 0;
  std::size_t essential_count = 0;
  double np = 0.0;
  double normalized_np = 0.0;
  BoundsPair theoretical;
  BoundsPair empirical;
};

inline LayerMeasures measure_layer(const WeightedBipartiteLayer& layer, double global_max,
                                   double p = 2.0,
                                   EssentialPolicy policy = EssentialPolicy::skip) {
  detail::check_p(p);
  const auto diagram = compute_diagram(layer, global_max, policy);
  LayerMeasures m;
  m.in_count = layer.in_count();
  m.out_count = layer.out_count();
  m.finite_points = diagram.finite_count();
  m.essential_count = diagram.essential_count();
  m.np = neural_persistence(diagram, p).value;
  m.normalized_np = m.np / detail::root(static_cast<double>(layer.vertex_count() - 1), p);
  m.theoretical = {0.0, theoretical_upper_bound(layer, global_max, p)};
  m.empirical = empirical_bounds(diagram.finite_count(),
                                 detail::sorted_transformed(layer, global_max), p);
  return m;
}

}  // namespace npers
