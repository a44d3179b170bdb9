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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "npers/errors.hpp"
#include "npers/stats.hpp"

namespace npers {

/// Whether larger (neural persistence, accuracy) or smaller (loss) values
/// count as better.
enum class Direction { maximize, minimize };

struct TraceSample {
  std::int64_t step = 0;  // quarter-epoch index
  double value = 0.0;

  friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

/// A monitored scalar over training. Steps are strictly increasing.
class MetricTrace {
 public:
  MetricTrace(std::vector<TraceSample> samples, Direction direction)
      : samples_(std::move(samples)), direction_(direction) {
    if (samples_.empty()) throw InvalidArgument("metric trace is empty");
    for (std::size_t i = 1; i < samples_.size(); ++i) {
      if (samples_[i].step <= samples_[i - 1].step) {
        throw InvalidArgument("trace steps must be strictly increasing (step " +
                              std::to_string(samples_[i].step) + " follows " +
                              std::to_string(samples_[i - 1].step) + ")");
      }
    }
  }

  /// Builds a trace sampled at steps first_step, first_step + 1, ...
  static MetricTrace from_values(std::span<const double> values, Direction direction,
                                 std::int64_t first_step = 0) {
    std::vector<TraceSample> samples;
    samples.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      samples.push_back({first_step + static_cast<std::int64_t>(i), values[i]});
    }
    return MetricTrace(std::move(samples), direction);
  }

  std::span<const TraceSample> samples() const noexcept { return samples_; }
  Direction direction() const noexcept { return direction_; }
  std::int64_t final_step() const noexcept { return samples_.back().step; }
  double final_value() const noexcept { return samples_.back().value; }

  /// Value of the last sample recorded at or before `step`; the first
  /// sample's value when `step` precedes the trace.
  double value_at_or_before(std::int64_t step) const noexcept {
    double v = samples_.front().value;
    for (const auto& s : samples_) {
      if (s.step > step) break;
      v = s.value;
    }
    return v;
  }

  bool same_steps(const MetricTrace& other) const noexcept {
    if (samples_.size() != other.samples_.size()) return false;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (samples_[i].step != other.samples_[i].step) return false;
    }
    return true;
  }

  friend bool operator==(const MetricTrace&, const MetricTrace&) = default;

 private:
  std::vector<TraceSample> samples_;
  Direction direction_;
};

/// Patience g and burn-in b are measured in epochs.
struct PatienceConfig {
  int patience = 1;
  int burn_in = 0;
  double delta_min = 0.0;

  void validate() const {
    if (patience < 1) throw InvalidArgument("patience must be >= 1");
    if (burn_in < 0) throw InvalidArgument("burn-in must be >= 0");
    if (!(delta_min >= 0.0)) throw InvalidArgument("delta_min must be >= 0");
  }
};

struct StopDecision {
  bool triggered = false;
  std::int64_t step = 0;  // stop step, or the trace's final step if not triggered
  double best = std::numeric_limits<double>::quiet_NaN();
};

/// Patience criterion on a trace.
///
/// Monitoring starts at the first sample with step >= b * steps_per_epoch.
/// A sample improves on the best value P when it beats P by more than
/// delta_min (strictly); otherwise the counter grows. The counter counts
/// monitored samples, and the criterion fires once it reaches
/// g * steps_per_epoch, i.e. g epochs worth of evaluations.
inline StopDecision patience_stop(const MetricTrace& trace, const PatienceConfig& config,
                                  int steps_per_epoch = 1) {
  config.validate();
  if (steps_per_epoch < 1) throw InvalidArgument("steps per epoch must be >= 1");
  const std::int64_t start = static_cast<std::int64_t>(config.burn_in) * steps_per_epoch;
  const std::int64_t threshold = static_cast<std::int64_t>(config.patience) * steps_per_epoch;
  const double sign = trace.direction() == Direction::maximize ? 1.0 : -1.0;

  double best = -std::numeric_limits<double>::infinity();
  std::int64_t counter = 0;
  StopDecision decision;
  decision.step = trace.final_step();
  for (const auto& s : trace.samples()) {
    if (s.step < start) continue;
    const double v = sign * s.value;
    if (v > best + config.delta_min) {
      best = v;
      counter = 0;
    } else {
      ++counter;
    }
    if (counter >= threshold) {
      decision.triggered = true;
      decision.step = s.step;
      break;
    }
  }
  if (best != -std::numeric_limits<double>::infinity()) decision.best = sign * best;
  return decision;
}

/// The traces of one training run, all on the same step axis.
struct RunTraces {
  MetricTrace np;             // maximised
  MetricTrace val_loss;       // minimised
  MetricTrace test_accuracy;  // read at stop steps
};

/// Position of a (delta epoch, delta accuracy) point. Q2 means the
/// persistence criterion stops earlier with higher accuracy.
enum class Quadrant { q1, q2, q3, q4, boundary };

inline const char* to_string(Quadrant q) noexcept {
  switch (q) {
    case Quadrant::q1: return "Q1";
    case Quadrant::q2: return "Q2";
    case Quadrant::q3: return "Q3";
    case Quadrant::q4: return "Q4";
    case Quadrant::boundary: break;
  }
  return "boundary";
}

inline Quadrant classify(double delta_epoch, double delta_accuracy) noexcept {
  if (delta_epoch > 0.0 && delta_accuracy > 0.0) return Quadrant::q1;
  if (delta_epoch < 0.0 && delta_accuracy > 0.0) return Quadrant::q2;
  if (delta_epoch < 0.0 && delta_accuracy < 0.0) return Quadrant::q3;
  if (delta_epoch > 0.0 && delta_accuracy < 0.0) return Quadrant::q4;
  return Quadrant::boundary;
}

struct GridCell {
  int burn_in = 0;
  int patience = 1;
  // Medians over runs.
  double np_stop_epoch = 0.0;
  double loss_stop_epoch = 0.0;
  double np_accuracy = 0.0;
  double loss_accuracy = 0.0;
  double delta_epoch = 0.0;     // np - loss
  double delta_accuracy = 0.0;  // np - loss
  std::size_t np_triggers = 0;
  std::size_t loss_triggers = 0;
  bool common = false;  // b and g both at most half the epoch budget
  Quadrant quadrant = Quadrant::boundary;
};

struct QuadrantCounts {
  std::size_t q1 = 0, q2 = 0, q3 = 0, q4 = 0, boundary = 0;

  void add(Quadrant q) noexcept {
    switch (q) {
      case Quadrant::q1: ++q1; break;
      case Quadrant::q2: ++q2; break;
      case Quadrant::q3: ++q3; break;
      case Quadrant::q4: ++q4; break;
      case Quadrant::boundary: ++boundary; break;
    }
  }
};

struct Barycentre {
  double delta_epoch = 0.0;
  double delta_accuracy = 0.0;
};

struct GridSummary {
  Barycentre barycentre;
  Barycentre common_barycentre;
  QuadrantCounts quadrants;
  QuadrantCounts common_quadrants;
  std::size_t cells = 0;
  std::size_t common_cells = 0;
  /// Cells in which each criterion fired in at least one run.
  std::size_t np_triggered_cells = 0;
  std::size_t loss_triggered_cells = 0;
};

struct StopGridResult {
  int epochs = 0;
  int steps_per_epoch = 1;
  std::size_t runs = 0;
  std::vector<GridCell> cells;  // b-major: index b * epochs + (g - 1)
  GridSummary summary;

  const GridCell& cell(int burn_in, int patience) const {
    return cells.at(static_cast<std::size_t>(burn_in) * static_cast<std::size_t>(epochs) +
                    static_cast<std::size_t>(patience - 1));
  }
};

/// Barycentres, quadrant counts and trigger counts of a grid.
inline GridSummary summarize(std::span<const GridCell> cells) {
  if (cells.empty()) throw InvalidArgument("grid has no cells");
  GridSummary s;
  for (const auto& c : cells) {
    s.barycentre.delta_epoch += c.delta_epoch;
    s.barycentre.delta_accuracy += c.delta_accuracy;
    s.quadrants.add(c.quadrant);
    ++s.cells;
    if (c.np_triggers > 0) ++s.np_triggered_cells;
    if (c.loss_triggers > 0) ++s.loss_triggered_cells;
    if (c.common) {
      s.common_barycentre.delta_epoch += c.delta_epoch;
      s.common_barycentre.delta_accuracy += c.delta_accuracy;
      s.common_quadrants.add(c.quadrant);
      ++s.common_cells;
    }
  }
  s.barycentre.delta_epoch /= static_cast<double>(s.cells);
  s.barycentre.delta_accuracy /= static_cast<double>(s.cells);
  if (s.common_cells > 0) {
    s.common_barycentre.delta_epoch /= static_cast<double>(s.common_cells);
    s.common_barycentre.delta_accuracy /= static_cast<double>(s.common_cells);
  }
  return s;
}

inline GridSummary summarize(const StopGridResult& grid) { return summarize(grid.cells); }

/// Compares persistence-based and validation-loss-based stopping over the
/// grid b in [0, G), g in [1, G] with delta_min = 0.
///
/// Per cell and criterion the stop epoch and the test accuracy at the stop
/// step are reduced to medians over the runs before the two criteria are
/// differenced. A criterion that never fires stops at the final step with the
/// final accuracy.
inline StopGridResult simulate_grid(std::span<const RunTraces> runs, int epochs,
                                    int steps_per_epoch) {
  if (runs.empty()) throw InvalidArgument("no runs to simulate");
  if (epochs < 1) throw InvalidArgument("epoch budget must be >= 1");
  if (steps_per_epoch < 1) throw InvalidArgument("steps per epoch must be >= 1");
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    if (!run.np.same_steps(run.val_loss) || !run.np.same_steps(run.test_accuracy)) {
      throw InvalidArgument("run " + std::to_string(r) + ": traces do not share a step axis");
    }
    if (run.np.direction() != Direction::maximize ||
        run.val_loss.direction() != Direction::minimize) {
      throw InvalidArgument("run " + std::to_string(r) +
                            ": persistence must be maximised and validation loss minimised");
    }
  }

  StopGridResult grid;
  grid.epochs = epochs;
  grid.steps_per_epoch = steps_per_epoch;
  grid.runs = runs.size();
  grid.cells.reserve(static_cast<std::size_t>(epochs) * static_cast<std::size_t>(epochs));
  const double spe = static_cast<double>(steps_per_epoch);

  std::vector<double> np_epochs(runs.size()), loss_epochs(runs.size());
  std::vector<double> np_accs(runs.size()), loss_accs(runs.size());
  for (int b = 0; b < epochs; ++b) {
    for (int g = 1; g <= epochs; ++g) {
      GridCell cell;
      cell.burn_in = b;
      cell.patience = g;
      cell.common = 2 * b <= epochs && 2 * g <= epochs;
      const PatienceConfig config{g, b, 0.0};
      for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto np = patience_stop(runs[r].np, config, steps_per_epoch);
        const auto loss = patience_stop(runs[r].val_loss, config, steps_per_epoch);
        cell.np_triggers += np.triggered ? 1 : 0;
        cell.loss_triggers += loss.triggered ? 1 : 0;
        np_epochs[r] = static_cast<double>(np.step) / spe;
        loss_epochs[r] = static_cast<double>(loss.step) / spe;
        np_accs[r] = runs[r].test_accuracy.value_at_or_before(np.step);
        loss_accs[r] = runs[r].test_accuracy.value_at_or_before(loss.step);
      }
      cell.np_stop_epoch = stats::median(np_epochs);
      cell.loss_stop_epoch = stats::median(loss_epochs);
      cell.np_accuracy = stats::median(np_accs);
      cell.loss_accuracy = stats::median(loss_accs);
      cell.delta_epoch = cell.np_stop_epoch - cell.loss_stop_epoch;
      cell.delta_accuracy = cell.np_accuracy - cell.loss_accuracy;
      cell.quadrant = classify(cell.delta_epoch, cell.delta_accuracy);
      grid.cells.push_back(cell);
    }
  }
  grid.summary = summarize(grid.cells);
  return grid;
}

inline StopGridResult simulate_grid(const MetricTrace& np, const MetricTrace& val_loss,
                                    const MetricTrace& test_accuracy, int epochs,
                                    int steps_per_epoch) {
  const RunTraces run{np, val_loss, test_accuracy};
  return simulate_grid(std::span<const RunTraces>(&run, 1), epochs, steps_per_epoch);
}

}  // namespace npers
