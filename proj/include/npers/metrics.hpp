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
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "npers/earlystop.hpp"
#include "npers/errors.hpp"

namespace npers {

/// Metric names accepted in trace files.
inline constexpr std::array<std::string_view, 6> kMetricNames = {
    "np_mean_normalized", "val_loss",     "test_accuracy",
    "train_loss",         "weight_pnorm", "val_accuracy"};

inline bool is_known_metric(std::string_view name) noexcept {
  return std::find(kMetricNames.begin(), kMetricNames.end(), name) != kMetricNames.end();
}

inline Direction metric_direction(std::string_view name) noexcept {
  return (name == "val_loss" || name == "train_loss") ? Direction::minimize : Direction::maximize;
}

/// Named metric series in insertion order.
class TraceTable {
 public:
  void add(std::string_view name, std::int64_t step, double value) {
    series_for(name).push_back({step, value});
  }

  const std::vector<TraceSample>* find(std::string_view name) const noexcept {
    for (const auto& [n, s] : series_) {
      if (n == name) return &s;
    }
    return nullptr;
  }

  bool contains(std::string_view name) const noexcept { return find(name) != nullptr; }

  /// The named series as a MetricTrace with the metric's natural direction.
  /// Files may repeat a step; the last value recorded for it wins.
  MetricTrace trace(std::string_view name) const {
    const auto* s = find(name);
    if (s == nullptr) throw InvalidArgument("no metric named '" + std::string(name) + "'");
    std::vector<TraceSample> samples;
    samples.reserve(s->size());
    for (const auto& x : *s) {
      if (!samples.empty() && samples.back().step == x.step) {
        samples.back().value = x.value;
      } else {
        samples.push_back(x);
      }
    }
    return MetricTrace(std::move(samples), metric_direction(name));
  }

  const std::vector<std::pair<std::string, std::vector<TraceSample>>>& series() const noexcept {
    return series_;
  }

  friend bool operator==(const TraceTable&, const TraceTable&) = default;

 private:
  std::vector<TraceSample>& series_for(std::string_view name) {
    for (auto& [n, s] : series_) {
      if (n == name) return s;
    }
    series_.emplace_back(std::string(name), std::vector<TraceSample>{});
    return series_.back().second;
  }

  std::vector<std::pair<std::string, std::vector<TraceSample>>> series_;
};

}  // namespace npers
