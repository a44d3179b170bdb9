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
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "npers/errors.hpp"
#include "npers/layer.hpp"
#include "npers/measures.hpp"
#include "npers/persistence.hpp"

namespace npers {

/// A single p x q convolution filter, row-major.
struct ConvFilter {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  ConvFilter() = default;
  ConvFilter(std::size_t rows_, std::size_t cols_, std::vector<double> values_)
      : rows(rows_), cols(cols_), values(std::move(values_)) {
    if (rows == 0 || cols == 0) throw InvalidArgument("filter needs at least one row and column");
    if (values.size() != rows * cols) {
      throw InvalidArgument("filter " + std::to_string(rows) + "x" + std::to_string(cols) +
                            " expects " + std::to_string(rows * cols) + " values, got " +
                            std::to_string(values.size()));
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw InvalidArgument("filter values must be finite");
    }
  }

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Input geometry of a stride-1 convolution with symmetric zero padding.
struct ConvGeometry {
  std::size_t h_in = 0;
  std::size_t w_in = 0;
  std::size_t padding = 0;

  std::size_t padded_h() const noexcept { return h_in + 2 * padding; }
  std::size_t padded_w() const noexcept { return w_in + 2 * padding; }

  void validate(const ConvFilter& filter) const {
    if (h_in == 0 || w_in == 0) throw InvalidArgument("input must be at least 1x1");
    if (filter.rows > padded_h() || filter.cols > padded_w()) {
      throw InvalidArgument("filter " + std::to_string(filter.rows) + "x" +
                            std::to_string(filter.cols) + " does not fit padded input " +
                            std::to_string(padded_h()) + "x" + std::to_string(padded_w()));
    }
  }

  std::size_t h_out(const ConvFilter& f) const noexcept { return padded_h() - f.rows + 1; }
  std::size_t w_out(const ConvFilter& f) const noexcept { return padded_w() - f.cols + 1; }
  /// Input neurons including the padded dummies.
  std::size_t input_neurons() const noexcept { return padded_h() * padded_w(); }
  std::size_t output_neurons(const ConvFilter& f) const noexcept { return h_out(f) * w_out(f); }
  /// Total tuple count m + n of a per-filter diagram.
  std::size_t tuple_count(const ConvFilter& f) const noexcept {
    return input_neurons() + output_neurons(f);
  }
};

/// The unrolled sparse matrix of one filter: one row per output position,
/// one column per (padded) input position, p * q edges per row.
inline WeightedBipartiteLayer unroll_filter(const ConvFilter& filter, const ConvGeometry& geo) {
  geo.validate(filter);
  const std::size_t ho = geo.h_out(filter);
  const std::size_t wo = geo.w_out(filter);
  const std::size_t row_stride = geo.padded_w();
  std::vector<SparseEntry> entries;
  entries.reserve(ho * wo * filter.values.size());
  for (std::size_t r = 0; r < ho; ++r) {
    for (std::size_t c = 0; c < wo; ++c) {
      const std::size_t out = r * wo + c;
      for (std::size_t i = 0; i < filter.rows; ++i) {
        for (std::size_t j = 0; j < filter.cols; ++j) {
          entries.push_back({out, (r + i) * row_stride + (c + j), filter.at(i, j)});
        }
      }
    }
  }
  return WeightedBipartiteLayer::sparse(ho * wo, geo.input_neurons(), std::move(entries));
}

/// Neural persistence of the unrolled filter matrix. The filter's own
/// largest absolute value drives the transformation; every surviving
/// component contributes a (1, 0) point.
inline double conv_np_exact(const ConvFilter& filter, const ConvGeometry& geo, double p = 2.0) {
  const auto layer = unroll_filter(filter, geo);
  return neural_persistence(compute_diagram(layer, filter.max_abs(), EssentialPolicy::death_zero), p)
      .value;
}

namespace detail {

struct ApproxPlan {
  std::vector<double> sorted;   // transformed filter weights, descending
  std::vector<double> corners;  // transformed corner weights, one per corner position
  std::size_t tau = 0;
  std::size_t outputs = 0;
};

inline ApproxPlan plan_approximation(const ConvFilter& filter, const ConvGeometry& geo) {
  geo.validate(filter);
  const double h_max = filter.max_abs();
  if (h_max == 0.0) throw DegenerateNetwork("filter is all zeros");
  ApproxPlan plan;
  plan.tau = geo.tuple_count(filter);
  plan.outputs = geo.output_neurons(filter);
  plan.sorted.reserve(filter.values.size());
  for (double v : filter.values) plan.sorted.push_back(std::abs(v) / h_max);
  std::sort(plan.sorted.begin(), plan.sorted.end(), std::greater<>());

  // Corner positions form a set: a 1 x q filter has two corners, 1 x 1 has one.
  const std::size_t last_r = filter.rows - 1;
  const std::size_t last_c = filter.cols - 1;
  std::vector<std::pair<std::size_t, std::size_t>> positions = {
      {0, 0}, {0, last_c}, {last_r, 0}, {last_r, last_c}};
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  for (auto [r, c] : positions) plan.corners.push_back(std::abs(filter.at(r, c)) / h_max);
  return plan;
}

inline bool is_corner_value(const ApproxPlan& plan, double v) {
  return std::find(plan.corners.begin(), plan.corners.end(), v) != plan.corners.end();
}

// Weight used by the fill step at index i. Once every filter weight has been
// consumed the smallest one keeps being repeated.
inline double fill_weight(const ApproxPlan& plan, std::size_t i) {
  return plan.sorted[std::min(i, plan.sorted.size() - 1)];
}

}  // namespace detail

/// The closed-form diagram approximation of one filter: its deaths, in
/// emission order. Starts with the surviving component (death 0), then one
/// death per corner weight, then each sorted weight repeated n times (n - 1
/// for corner values) until m + n tuples are written.
inline std::vector<double> conv_approx_deaths(const ConvFilter& filter, const ConvGeometry& geo) {
  const auto plan = detail::plan_approximation(filter, geo);
  std::vector<double> deaths;
  deaths.reserve(plan.tau);
  deaths.push_back(0.0);
  for (double c : plan.corners) deaths.push_back(c);
  for (std::size_t i = 0; deaths.size() < plan.tau; ++i) {
    const double s = detail::fill_weight(plan, i);
    const std::size_t repeats = plan.outputs - (detail::is_corner_value(plan, s) ? 1 : 0);
    const std::size_t take = std::min(repeats, plan.tau - deaths.size());
    deaths.insert(deaths.end(), take, s);
    if (i + 1 >= plan.sorted.size()) deaths.resize(plan.tau, s);
  }
  return deaths;
}

/// p-norm of the approximated diagram. Works on the sorted filter weights
/// and repeat counts only, so its cost does not depend on the input size
/// beyond the arithmetic for m + n.
inline double conv_np_approx(const ConvFilter& filter, const ConvGeometry& geo, double p = 2.0) {
  detail::check_p(p);
  const auto plan = detail::plan_approximation(filter, geo);
  detail::PNormAccumulator acc(p);
  acc.add(1.0);
  std::size_t written = 1;
  for (double c : plan.corners) {
    acc.add(1.0 - c);
    ++written;
  }
  for (std::size_t i = 0; written < plan.tau; ++i) {
    const double s = detail::fill_weight(plan, i);
    const std::size_t repeats = plan.outputs - (detail::is_corner_value(plan, s) ? 1 : 0);
    const std::size_t take = std::min(repeats, plan.tau - written);
    acc.add(1.0 - s, take);
    written += take;
    // Past the last weight the remaining tuples all share it.
    if (i + 1 >= plan.sorted.size() && written < plan.tau) {
      acc.add(1.0 - s, plan.tau - written);
      written = plan.tau;
    }
  }
  return acc.result();
}

enum class ConvMethod { exact, approx };

/// Per-filter value normalised by (m + n - 1)^(1/p).
inline double normalized_conv_np(const ConvFilter& filter, const ConvGeometry& geo, double p,
                                 ConvMethod method) {
  const double value =
      method == ConvMethod::exact ? conv_np_exact(filter, geo, p) : conv_np_approx(filter, geo, p);
  return value / detail::root(static_cast<double>(geo.tuple_count(filter) - 1), p);
}

/// Mean of the normalised per-filter values over a filter bank, in order.
inline double layer_mean_conv_np(std::span<const ConvFilter> filters, const ConvGeometry& geo,
                                 double p = 2.0, ConvMethod method = ConvMethod::approx) {
  if (filters.empty()) throw InvalidArgument("filter list is empty");
  double sum = 0.0;
  for (const auto& f : filters) sum += normalized_conv_np(f, geo, p, method);
  return sum / static_cast<double>(filters.size());
}

}  // namespace npers
