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


#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "npers/init.hpp"
#include "npers/measures.hpp"
#include "npers/stats.hpp"
#include "test_support.hpp"

namespace npers {
namespace {

const auto kK22 = WeightedBipartiteLayer::dense(2, 2, {1.0, 0.5, 0.5, 0.5});

double np_of(const WeightedBipartiteLayer& l, double p = 2.0,
             EssentialPolicy policy = EssentialPolicy::skip) {
  return neural_persistence(compute_diagram(l, l.max_abs_weight(), policy), p).value;
}

TEST(NeuralPersistence, K22WorkedExample) {
  EXPECT_NEAR(np_of(kK22), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(theoretical_upper_bound(kK22, 1.0, 2.0), 0.5 * std::sqrt(3.0), 1e-15);
  const auto b = empirical_bounds(kK22, 1.0, 2.0);
  EXPECT_NEAR(b.lower, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(b.upper, std::sqrt(0.75), 1e-15);
  EXPECT_NEAR(normalized_neural_persistence(kK22, 1.0, 2.0), std::sqrt(0.5) / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(normalized_neural_persistence(kK22, 1.0, 2.0), 0.40824829046386302, 1e-12);
}

TEST(NeuralPersistence, PNormVariants) {
  // Persistences {0, .5, .5}.
  EXPECT_DOUBLE_EQ(np_of(kK22, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(np_of(kK22, 3.0), std::cbrt(0.25));
  EXPECT_THROW(np_of(kK22, 0.5), InvalidArgument);
}

TEST(NeuralPersistence, ConstantLayersAreZero) {
  for (std::size_t side : {1u, 2u, 5u, 13u}) {
    const auto l = WeightedBipartiteLayer::dense(side, side + 1, std::vector<double>(side * (side + 1), -0.3));
    for (double p : {1.0, 2.0, 3.0}) {
      EXPECT_EQ(np_of(l, p), 0.0);
      EXPECT_EQ(theoretical_upper_bound(l, 0.3, p), 0.0);
      EXPECT_EQ(normalized_neural_persistence(l, 0.3, p), 0.0);
      EXPECT_EQ(normalized_neural_persistence(l, 0.3, p, EssentialPolicy::skip,
                                              NormalizationRange::observed),
                0.0);
    }
  }
}

TEST(NeuralPersistence, DeathZeroCountsEssentials) {
  // {0, .5, .5} plus one essential of persistence 1.
  EXPECT_DOUBLE_EQ(np_of(kK22, 2.0, EssentialPolicy::death_zero), std::sqrt(1.5));
}

TEST(EmpiricalBounds, DirectEvaluation) {
  const std::vector<double> w{0.5, 0.5, 0.5, 1.0};
  const auto b = empirical_bounds(3, w, 2.0);
  EXPECT_DOUBLE_EQ(b.lower, std::sqrt(0.5));
  EXPECT_DOUBLE_EQ(b.upper, std::sqrt(0.75));
  EXPECT_THROW(empirical_bounds(5, w, 2.0), InvalidArgument);
  const std::vector<double> flat(6, 0.25);
  const auto c = empirical_bounds(4, flat, 2.0);
  EXPECT_DOUBLE_EQ(c.lower, 0.75 * 2.0);
  EXPECT_DOUBLE_EQ(c.upper, c.lower);
}

// With vectors of length n instead of the finite point count, the lower
// bound is not a bound: on K22 it exceeds NP.
TEST(EmpiricalBounds, VertexCountVariantCanExceedNP) {
  const auto b = empirical_bounds(kK22, 1.0, 2.0, BoundLength::vertex_count);
  EXPECT_DOUBLE_EQ(b.lower, std::sqrt(0.75));
  EXPECT_GT(b.lower, np_of(kK22));
}

TEST(Bounds, HoldOnRandomLayers) {
  const auto corpus = testing::layer_corpus(300, 21);
  for (const auto& l : corpus) {
    const double g = l.max_abs_weight();
    for (double p : {1.0, 2.0, 3.0}) {
      const double v = np_of(l, p);
      const double slack = 1e-12 * std::max(1.0, v);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, theoretical_upper_bound(l, g, p) + slack);
      const auto b = empirical_bounds(l, g, p);
      EXPECT_LE(b.lower, v + slack);
      EXPECT_LE(v, b.upper + slack);
    }
  }
}

// For arbitrary doubles c * w rounds, so only near-equality can hold; the
// bit-exact case is covered with exactly scalable weights elsewhere.
TEST(NeuralPersistence, ScaleInvariantUpToRoundingOnGenericWeights) {
  for (const auto& l : testing::layer_corpus(100, 9)) {
    const double base = np_of(l);
    for (double c : {1e-6, 3.7, 1e6}) {
      const auto scaled = l.map_weights([c](double w) { return c * w; });
      EXPECT_NEAR(np_of(scaled), base, 1e-12 * std::max(1.0, base));
    }
  }
}

TEST(Normalized, FullRangeExtremes) {
  // Weights 1 and 0 span the full range; p = 1 bound is n - 1.
  const auto l = WeightedBipartiteLayer::dense(2, 2, {1.0, 0.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(theoretical_upper_bound(l, 1.0, 1.0), 3.0);
  // A single unit weight among zeros: one merge at 1, n - 2 merges at 0,
  // so the value is ((n - 2) / (n - 1))^(1/p) rather than 1.
  for (std::size_t side : {2u, 4u, 10u}) {
    std::vector<double> w(side * side, 0.0);
    w[0] = 1.0;
    const auto one = WeightedBipartiteLayer::dense(side, side, w);
    const double n = 2.0 * static_cast<double>(side);
    EXPECT_NEAR(normalized_neural_persistence(one, 1.0, 2.0), std::sqrt((n - 2) / (n - 1)), 1e-15);
  }
  // Inside a network with a larger weight elsewhere, an all-zero layer has
  // every merge at 0 and reaches 1.
  const auto zero = WeightedBipartiteLayer::dense(3, 3, std::vector<double>(9, 0.0));
  EXPECT_DOUBLE_EQ(normalized_neural_persistence(zero, 1.0, 2.0), 1.0);
}

TEST(Normalized, ObservedRangeRescales) {
  const double full = normalized_neural_persistence(kK22, 1.0);
  const double observed =
      normalized_neural_persistence(kK22, 1.0, 2.0, EssentialPolicy::skip, NormalizationRange::observed);
  EXPECT_DOUBLE_EQ(observed, full * 2.0);  // range .5 instead of 1
  EXPECT_THROW(normalized_neural_persistence(kK22, 1.0, 0.0), InvalidArgument);
}

TEST(MeanNormalized, AveragesLayersWithGlobalMax) {
  NetworkSnapshot net;
  net.layers.push_back(kK22);
  EXPECT_DOUBLE_EQ(mean_normalized_neural_persistence(net), normalized_neural_persistence(kK22, 1.0));
  net.layers.push_back(WeightedBipartiteLayer::dense(2, 2, std::vector<double>(4, 0.5)));
  // Second layer: all deaths 0.5 under global max 1, NP = sqrt(3 * .25).
  const double second = std::sqrt(0.75) / std::sqrt(3.0);
  EXPECT_DOUBLE_EQ(mean_normalized_neural_persistence(net),
                   (normalized_neural_persistence(kK22, 1.0) + second) / 2.0);
  EXPECT_THROW(mean_normalized_neural_persistence(NetworkSnapshot{}), InvalidArgument);
  NetworkSnapshot zeros;
  zeros.layers.push_back(WeightedBipartiteLayer::dense(2, 2, std::vector<double>(4, 0.0)));
  EXPECT_THROW(mean_normalized_neural_persistence(zeros), DegenerateNetwork);
}

TEST(MeasureLayer, BundlesEverything) {
  const auto m = measure_layer(kK22, 1.0, 2.0, EssentialPolicy::skip);
  EXPECT_EQ(m.finite_points, 3u);
  EXPECT_EQ(m.essential_count, 1u);
  EXPECT_DOUBLE_EQ(m.np, std::sqrt(0.5));
  EXPECT_DOUBLE_EQ(m.empirical.upper, std::sqrt(0.75));
}

// Gaussian matrices have a heavier tail than uniform ones, which shows up
// as larger persistence.
TEST(Distributions, GaussianAboveUniform) {
  const MlpSpec spec{{50, 10}};
  std::vector<double> gauss, unif;
  for (std::uint64_t s = 0; s < 60; ++s) {
    gauss.push_back(np_of(init_weights(spec, InitScheme::gaussian(1.0), s).layers[0]));
    unif.push_back(np_of(init_weights(spec, InitScheme::uniform(-1.0, 1.0), s).layers[0]));
  }
  EXPECT_GT(stats::mean(gauss), stats::mean(unif));
  EXPECT_GT(stats::summarize(gauss).q1, stats::summarize(unif).q3);
}

}  // namespace
}  // namespace npers
