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

// Shared generators and oracles for the test binaries.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "npers/earlystop.hpp"
#include "npers/layer.hpp"

namespace npers::testing {

inline std::vector<double> values_of(const WeightedBipartiteLayer& l) {
  const auto v = l.dense_values();
  return {v.begin(), v.end()};
}

enum class WeightKind { normal, uniform, discrete };

inline const char* kind_name(WeightKind k) {
  switch (k) {
    case WeightKind::normal: return "normal";
    case WeightKind::uniform: return "uniform";
    case WeightKind::discrete: return "discrete";
  }
  return "?";
}

/// Dense layer with sides in [1, max_side]. The discrete kind draws from a
/// handful of signed levels so ties are everywhere.
inline WeightedBipartiteLayer random_layer(std::mt19937_64& rng, WeightKind kind,
                                           std::size_t max_side = 20) {
  std::uniform_int_distribution<std::size_t> side(1, max_side);
  const std::size_t out = side(rng);
  const std::size_t in = side(rng);
  std::vector<double> w(out * in);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::uniform_int_distribution<int> level(-4, 4);
  for (auto& x : w) {
    switch (kind) {
      case WeightKind::normal: x = normal(rng); break;
      case WeightKind::uniform: x = uniform(rng); break;
      case WeightKind::discrete: x = 0.25 * level(rng); break;
    }
  }
  // A layer of zeros has no transform; keep one nonzero entry.
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[0] = 1.0;
  return WeightedBipartiteLayer::dense(out, in, std::move(w));
}

/// The acceptance corpus: kinds cycle normal, uniform, discrete.
inline std::vector<WeightedBipartiteLayer> layer_corpus(std::size_t count, std::uint64_t seed,
                                                        std::size_t max_side = 20) {
  std::mt19937_64 rng(seed);
  std::vector<WeightedBipartiteLayer> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(random_layer(rng, static_cast<WeightKind>(i % 3), max_side));
  }
  return out;
}

/// Weights of the form 15625 * k * 2^-30 with |k| < 2^24. Multiplying by
/// 1e6 or 1e-6 is then exact in binary64 (15625 = 5^6 and 1e-6 rounds to
/// within 2^-54 of its true value), so scaled layers carry exactly the same
/// ratios and the transform must reproduce identical bits.
inline WeightedBipartiteLayer scalable_layer(std::mt19937_64& rng, std::size_t max_side = 20) {
  std::uniform_int_distribution<std::size_t> side(1, max_side);
  const std::size_t out = side(rng);
  const std::size_t in = side(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double limit = static_cast<double>((1 << 24) - 1);
  std::vector<double> w(out * in);
  for (auto& x : w) {
    const double k = std::clamp(std::round(normal(rng) * (1 << 21)), -limit, limit);
    x = std::ldexp(15625.0 * k, -30);
  }
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[0] = std::ldexp(15625.0, -30);
  return WeightedBipartiteLayer::dense(out, in, std::move(w));
}

/// Maximum spanning forest by exhaustive search over edge subsets: among
/// all acyclic subsets of maximal size, the one whose descending weight
/// list is lexicographically largest. Only for layers with <= 12 edges.
inline std::vector<double> brute_force_forest(const WeightedBipartiteLayer& layer, double gmax) {
  struct E { std::size_t a, b; double w; };
  std::vector<E> edges;
  const std::size_t out = layer.out_count();
  layer.for_each_edge([&](std::size_t r, std::size_t c, double w) {
    edges.push_back({r, out + c, std::abs(w) / gmax});
  });
  const std::size_t n = layer.vertex_count();
  const std::size_t m = edges.size();
  std::vector<double> best;
  std::size_t best_size = 0;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    // Acyclicity via a throwaway label propagation, independent of UnionFind.
    std::vector<std::size_t> label(n);
    for (std::size_t v = 0; v < n; ++v) label[v] = v;
    bool acyclic = true;
    std::vector<double> chosen;
    for (std::size_t e = 0; e < m && acyclic; ++e) {
      if (!(mask & (1u << e))) continue;
      const std::size_t la = label[edges[e].a];
      const std::size_t lb = label[edges[e].b];
      if (la == lb) {
        acyclic = false;
        break;
      }
      for (auto& l : label) {
        if (l == lb) l = la;
      }
      chosen.push_back(edges[e].w);
    }
    if (!acyclic) continue;
    std::sort(chosen.begin(), chosen.end(), std::greater<>());
    if (chosen.size() > best_size || (chosen.size() == best_size && chosen > best)) {
      best_size = chosen.size();
      best = chosen;
    }
  }
  return best;
}

/// Traces over `epochs` epochs (steps 0 .. epochs * spe) where persistence
/// rises until `np_plateau` epochs and validation loss falls until
/// `loss_plateau` epochs; both stay flat afterwards. Accuracy is constant.
inline RunTraces plateau_traces(int epochs, int spe, int np_plateau, int loss_plateau) {
  std::vector<double> np, loss, acc;
  for (int s = 0; s <= epochs * spe; ++s) {
    np.push_back(std::min(s, np_plateau * spe) * 0.01);
    loss.push_back(1.0 - std::min(s, loss_plateau * spe) * 0.01);
    acc.push_back(0.8);
  }
  return {MetricTrace::from_values(np, Direction::maximize),
          MetricTrace::from_values(loss, Direction::minimize),
          MetricTrace::from_values(acc, Direction::maximize)};
}

/// Persistence and loss traces that are exact mirrors of each other.
inline RunTraces mirrored_traces(std::mt19937_64& rng, int epochs, int spe) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> np, loss, acc;
  double level = 0.0;
  for (int s = 0; s <= epochs * spe; ++s) {
    level += noise(rng);
    np.push_back(level);
    loss.push_back(-level);
    acc.push_back(0.5 + 0.01 * s);
  }
  return {MetricTrace::from_values(np, Direction::maximize),
          MetricTrace::from_values(loss, Direction::minimize),
          MetricTrace::from_values(acc, Direction::maximize)};
}

}  // namespace npers::testing
