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
#include <functional>
#include <limits>
#include <vector>

#include "npers/errors.hpp"
#include "npers/layer.hpp"

namespace npers {

/// Transformed weights of a maximum spanning forest of the layer, largest
/// first.
///
/// This is an independent check on compute_diagram: it runs Prim's
/// algorithm (repeated selection of the heaviest edge leaving the current
/// tree, no global sort, no union-find). The multiset it returns must equal
/// the deaths of the diagram's finite points.
inline std::vector<double> mst_oracle(const WeightedBipartiteLayer& layer, double global_max) {
  if (!std::isfinite(global_max) || global_max < 0.0) {
    throw InvalidArgument("global maximum must be a finite non-negative number");
  }
  if (global_max == 0.0) throw DegenerateNetwork("all weights are zero");
  if (layer.max_abs_weight() > global_max) {
    throw InvalidArgument("global maximum is smaller than a weight of the layer");
  }

  // Vertices: outputs first, then inputs.
  const std::size_t outs = layer.out_count();
  const std::size_t n = layer.vertex_count();
  struct Arc {
    std::size_t to;
    double weight;
  };
  std::vector<std::vector<Arc>> adjacency(n);
  layer.for_each_edge([&](std::size_t r, std::size_t c, double w) {
    const double t = std::abs(w) / global_max;
    adjacency[r].push_back({outs + c, t});
    adjacency[outs + c].push_back({r, t});
  });

  constexpr double none = -std::numeric_limits<double>::infinity();
  std::vector<double> best(n, none);
  std::vector<bool> in_tree(n, false);
  std::vector<double> selected;
  selected.reserve(n);

  std::size_t visited = 0;
  while (visited < n) {
    // Heaviest frontier vertex, or a fresh root when the frontier is empty.
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      if (pick == n || best[v] > best[pick]) pick = v;
    }
    if (best[pick] != none) selected.push_back(best[pick]);
    in_tree[pick] = true;
    ++visited;
    for (const auto& arc : adjacency[pick]) {
      if (!in_tree[arc.to]) best[arc.to] = std::max(best[arc.to], arc.weight);
    }
  }
  std::sort(selected.begin(), selected.end(), std::greater<>());
  return selected;
}

}  // namespace npers
