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
#include <utility>
#include <vector>

#include "npers/errors.hpp"

namespace npers {

/// One stored edge of a sparse layer. `row` indexes the output unit,
/// `col` the input unit.
struct SparseEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double weight = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// A layer of a feedforward network seen as a weighted bipartite graph
/// between `in_count` input units and `out_count` output units.
///
/// Weights are indexed (output, input). A dense layer has exactly
/// in_count * out_count edges stored row-major. A sparse layer stores only
/// its edges; absent entries are non-edges, which is what an unrolled
/// convolution needs. Sparse entries are kept sorted by (row, col), so both
/// representations enumerate edges in the same canonical order.
class WeightedBipartiteLayer {
 public:
  static WeightedBipartiteLayer dense(std::size_t out_count, std::size_t in_count,
                                      std::vector<double> row_major) {
    check_counts(out_count, in_count);
    if (row_major.size() != out_count * in_count) {
      throw InvalidArgument("dense layer " + std::to_string(out_count) + "x" +
                            std::to_string(in_count) + " expects " +
                            std::to_string(out_count * in_count) + " weights, got " +
                            std::to_string(row_major.size()));
    }
    for (double w : row_major) check_finite(w);
    WeightedBipartiteLayer layer;
    layer.out_count_ = out_count;
    layer.in_count_ = in_count;
    layer.dense_ = std::move(row_major);
    return layer;
  }

  static WeightedBipartiteLayer sparse(std::size_t out_count, std::size_t in_count,
                                       std::vector<SparseEntry> entries) {
    check_counts(out_count, in_count);
    std::sort(entries.begin(), entries.end(), [](const SparseEntry& a, const SparseEntry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      if (e.row >= out_count || e.col >= in_count) {
        throw InvalidArgument("sparse entry (" + std::to_string(e.row) + ", " +
                              std::to_string(e.col) + ") outside " + std::to_string(out_count) +
                              "x" + std::to_string(in_count) + " layer");
      }
      check_finite(e.weight);
      if (i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col) {
        throw InvalidArgument("duplicate sparse entry (" + std::to_string(e.row) + ", " +
                              std::to_string(e.col) + ")");
      }
    }
    WeightedBipartiteLayer layer;
    layer.out_count_ = out_count;
    layer.in_count_ = in_count;
    layer.sparse_ = true;
    layer.entries_ = std::move(entries);
    return layer;
  }

  std::size_t in_count() const noexcept { return in_count_; }
  std::size_t out_count() const noexcept { return out_count_; }
  std::size_t vertex_count() const noexcept { return in_count_ + out_count_; }
  bool is_sparse() const noexcept { return sparse_; }

  std::size_t edge_count() const noexcept {
    return sparse_ ? entries_.size() : dense_.size();
  }

  std::span<const double> dense_values() const noexcept { return dense_; }
  std::span<const SparseEntry> entries() const noexcept { return entries_; }

  /// Calls f(row, col, weight) for every edge in canonical (row, col) order.
  template <class F>
  void for_each_edge(F&& f) const {
    if (sparse_) {
      for (const auto& e : entries_) f(e.row, e.col, e.weight);
      return;
    }
    for (std::size_t r = 0; r < out_count_; ++r) {
      const double* row = dense_.data() + r * in_count_;
      for (std::size_t c = 0; c < in_count_; ++c) f(r, c, row[c]);
    }
  }

  /// Largest absolute weight; 0 for a layer without edges.
  double max_abs_weight() const noexcept {
    double m = 0.0;
    for_each_edge([&m](std::size_t, std::size_t, double w) { m = std::max(m, std::abs(w)); });
    return m;
  }

  /// Same structure, weights replaced by f(weight).
  template <class F>
  WeightedBipartiteLayer map_weights(F&& f) const {
    WeightedBipartiteLayer out = *this;
    for (auto& w : out.dense_) w = f(w);
    for (auto& e : out.entries_) e.weight = f(e.weight);
    return out;
  }

  friend bool operator==(const WeightedBipartiteLayer&, const WeightedBipartiteLayer&) = default;

 private:
  WeightedBipartiteLayer() = default;

  static void check_counts(std::size_t out_count, std::size_t in_count) {
    if (out_count == 0 || in_count == 0) {
      throw InvalidArgument("layer needs at least one input and one output unit");
    }
  }

  static void check_finite(double w) {
    if (!std::isfinite(w)) throw InvalidArgument("layer weights must be finite");
  }

  std::size_t out_count_ = 0;
  std::size_t in_count_ = 0;
  bool sparse_ = false;
  std::vector<double> dense_;
  std::vector<SparseEntry> entries_;
};

/// The layers of a network captured at one training step. Steps count
/// quarter epochs, so step 4 is the end of epoch 1.
struct NetworkSnapshot {
  std::int64_t step = 0;
  std::vector<WeightedBipartiteLayer> layers;

  /// Largest absolute weight over every layer of the network.
  double global_max_abs() const noexcept {
    double m = 0.0;
    for (const auto& layer : layers) m = std::max(m, layer.max_abs_weight());
    return m;
  }

  /// True when each layer's input count equals the previous layer's output
  /// count, i.e. the layers chain into one feedforward network.
  bool is_chained() const noexcept {
    for (std::size_t k = 1; k < layers.size(); ++k) {
      if (layers[k].in_count() != layers[k - 1].out_count()) return false;
    }
    return true;
  }

  friend bool operator==(const NetworkSnapshot&, const NetworkSnapshot&) = default;
};

}  // namespace npers
