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
#include <span>
#include <string>
#include <vector>

#include "npers/errors.hpp"
#include "npers/layer.hpp"
#include "npers/union_find.hpp"

namespace npers {

/// How components that survive the whole filtration are accounted for.
///
/// `skip` leaves them out of the diagram, which makes the layer bounds exact.
/// `death_zero` adds one (1, 0) point per survivor, the accounting used by
/// the convolutional approximation.
enum class EssentialPolicy { skip, death_zero };

inline const char* to_string(EssentialPolicy policy) noexcept {
  return policy == EssentialPolicy::skip ? "skip" : "zero";
}

/// A merge event of the descending filtration. Every vertex is born at 1.
struct PersistencePoint {
  double birth = 1.0;
  double death = 0.0;

  double persistence() const noexcept { return birth - death; }

  friend bool operator==(const PersistencePoint&, const PersistencePoint&) = default;
};

/// Zero-dimensional persistence diagram of one layer.
///
/// `points()` holds the finite merge points in emission order, so deaths are
/// non-ascending. Essential points are implied by `essential_count()` and
/// only take part in `for_each_included` under EssentialPolicy::death_zero.
class PersistenceDiagram {
 public:
  PersistenceDiagram(std::vector<PersistencePoint> points, std::size_t essential_count,
                     EssentialPolicy policy)
      : points_(std::move(points)), essential_count_(essential_count), policy_(policy) {}

  std::span<const PersistencePoint> points() const noexcept { return points_; }
  std::size_t finite_count() const noexcept { return points_.size(); }
  std::size_t essential_count() const noexcept { return essential_count_; }
  EssentialPolicy policy() const noexcept { return policy_; }

  /// Number of points that enter summaries under the diagram's policy.
  std::size_t included_count() const noexcept {
    return points_.size() + (policy_ == EssentialPolicy::death_zero ? essential_count_ : 0);
  }

  std::vector<double> deaths() const {
    std::vector<double> out;
    out.reserve(points_.size());
    for (const auto& p : points_) out.push_back(p.death);
    return out;
  }

  template <class F>
  void for_each_included(F&& f) const {
    for (const auto& p : points_) f(p);
    if (policy_ == EssentialPolicy::death_zero) {
      for (std::size_t i = 0; i < essential_count_; ++i) f(PersistencePoint{1.0, 0.0});
    }
  }

  friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;

 private:
  std::vector<PersistencePoint> points_;
  std::size_t essential_count_;
  EssentialPolicy policy_;
};

/// An edge of the filtration: output unit, input unit, transformed weight.
struct FiltrationEdge {
  std::uint32_t out = 0;
  std::uint32_t in = 0;
  double weight = 0.0;

  friend bool operator==(const FiltrationEdge&, const FiltrationEdge&) = default;
};

namespace detail {

inline void check_global_max(double global_max) {
  if (!std::isfinite(global_max) || global_max < 0.0) {
    throw InvalidArgument("global maximum must be a finite non-negative number");
  }
  if (global_max == 0.0) {
    throw DegenerateNetwork("all weights are zero; neural persistence is undefined");
  }
}

}  // namespace detail

/// Maps every weight w to |w| / global_max, where global_max is the largest
/// absolute weight of the whole network (for a standalone layer, of the
/// layer itself). The result keeps the layer's structure.
///
/// A single correctly rounded division per weight keeps the result
/// identical under exact rescaling of weights and maximum.
inline WeightedBipartiteLayer transform_weights(const WeightedBipartiteLayer& layer,
                                                double global_max) {
  detail::check_global_max(global_max);
  if (layer.max_abs_weight() > global_max) {
    throw InvalidArgument("global maximum is smaller than a weight of the layer");
  }
  return layer.map_weights([global_max](double w) { return std::abs(w) / global_max; });
}

/// Orders the edges of a transformed layer by weight, largest first. Ties
/// are broken by (output, input) ascending, which makes the order total.
inline std::vector<FiltrationEdge> build_filtration(const WeightedBipartiteLayer& transformed) {
  std::vector<FiltrationEdge> edges;
  edges.reserve(transformed.edge_count());
  transformed.for_each_edge([&edges](std::size_t r, std::size_t c, double w) {
    edges.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), w});
  });
  // Edges are enumerated in (row, col) order already, so a stable sort on the
  // weight alone realises the tie-break.
  std::stable_sort(edges.begin(), edges.end(),
                   [](const FiltrationEdge& a, const FiltrationEdge& b) { return a.weight > b.weight; });
  return edges;
}

/// Runs union-find over a filtration of a bipartite graph with `out_count`
/// output and `in_count` input vertices, all born at 1.
inline PersistenceDiagram diagram_from_filtration(std::span<const FiltrationEdge> filtration,
                                                  std::size_t out_count, std::size_t in_count,
                                                  EssentialPolicy policy) {
  UnionFind components(out_count + in_count);
  std::vector<PersistencePoint> points;
  points.reserve(out_count + in_count - 1);
  for (const auto& e : filtration) {
    if (components.component_count() == 1) break;
    if (components.unite(e.out, out_count + e.in)) points.push_back({1.0, e.weight});
  }
  return PersistenceDiagram(std::move(points), components.component_count(), policy);
}

/// Zero-dimensional persistence diagram of a layer under the descending
/// transformed-weight filtration.
inline PersistenceDiagram compute_diagram(const WeightedBipartiteLayer& layer, double global_max,
                                          EssentialPolicy policy = EssentialPolicy::skip) {
  const auto filtration = build_filtration(transform_weights(layer, global_max));
  return diagram_from_filtration(filtration, layer.out_count(), layer.in_count(), policy);
}

}  // namespace npers
