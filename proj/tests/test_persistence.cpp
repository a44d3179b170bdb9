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

#include <algorithm>
#include <random>

#include "npers/mst_oracle.hpp"
#include "npers/persistence.hpp"
#include "npers/union_find.hpp"
#include "test_support.hpp"

namespace npers {
namespace {

WeightedBipartiteLayer k22() { return WeightedBipartiteLayer::dense(2, 2, {1.0, 0.5, 0.5, 0.5}); }

std::vector<double> sorted_desc(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

TEST(UnionFind, MergesAndCounts) {
  UnionFind uf(5);
  EXPECT_EQ(uf.component_count(), 5u);
  EXPECT_TRUE(uf.unite(0, 1));
  EXPECT_TRUE(uf.unite(3, 4));
  EXPECT_FALSE(uf.unite(1, 0));
  EXPECT_TRUE(uf.unite(1, 4));
  EXPECT_EQ(uf.component_count(), 2u);
  EXPECT_EQ(uf.find(0), uf.find(3));
  EXPECT_NE(uf.find(2), uf.find(0));
}

TEST(UnionFind, LongChainStaysConsistent) {
  UnionFind uf(10000);
  for (std::size_t i = 1; i < 10000; ++i) ASSERT_TRUE(uf.unite(i - 1, i));
  EXPECT_EQ(uf.component_count(), 1u);
  EXPECT_EQ(uf.find(0), uf.find(9999));
}

TEST(Transform, DividesByGlobalMax) {
  const auto t = transform_weights(WeightedBipartiteLayer::dense(1, 2, {2.0, -1.0}), 2.0);
  EXPECT_EQ(testing::values_of(t), (std::vector<double>{1.0, 0.5}));
}

TEST(Transform, ConstantLayerMapsToOnes) {
  const auto t = transform_weights(WeightedBipartiteLayer::dense(2, 2, {0.7, 0.7, 0.7, 0.7}), 0.7);
  EXPECT_EQ(testing::values_of(t), std::vector<double>(4, 1.0));
}

TEST(Transform, RejectsBadGlobalMax) {
  const auto layer = WeightedBipartiteLayer::dense(1, 2, {2.0, -1.0});
  EXPECT_THROW(transform_weights(layer, 1.0), InvalidArgument);
  EXPECT_THROW(transform_weights(layer, -2.0), InvalidArgument);
  EXPECT_THROW(transform_weights(WeightedBipartiteLayer::dense(1, 1, {0.0}), 0.0), DegenerateNetwork);
}

TEST(Filtration, SortsDescendingWithRowMajorTies) {
  const auto f = build_filtration(k22());
  ASSERT_EQ(f.size(), 4u);
  const std::vector<std::tuple<unsigned, unsigned, double>> expected = {
      {0, 0, 1.0}, {0, 1, 0.5}, {1, 0, 0.5}, {1, 1, 0.5}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(f[i].out, std::get<0>(expected[i]));
    EXPECT_EQ(f[i].in, std::get<1>(expected[i]));
    EXPECT_EQ(f[i].weight, std::get<2>(expected[i]));
  }
}

TEST(Filtration, AlreadySortedAndConstantKeepRowMajor) {
  for (const auto& values : {std::vector<double>{.9, .8, .7, .6, .5, .4}, std::vector<double>(6, .3)}) {
    const auto f = build_filtration(WeightedBipartiteLayer::dense(2, 3, values));
    for (std::size_t i = 0; i < f.size(); ++i) {
      EXPECT_EQ(f[i].out * 3 + f[i].in, i);
    }
  }
}

TEST(Diagram, K22Skip) {
  const auto d = compute_diagram(k22(), 1.0, EssentialPolicy::skip);
  EXPECT_EQ(d.deaths(), (std::vector<double>{1.0, 0.5, 0.5}));
  EXPECT_EQ(d.essential_count(), 1u);
  EXPECT_EQ(d.included_count(), 3u);
  for (const auto& p : d.points()) EXPECT_EQ(p.birth, 1.0);
}

TEST(Diagram, K22DeathZeroAddsEssential) {
  const auto d = compute_diagram(k22(), 1.0, EssentialPolicy::death_zero);
  EXPECT_EQ(d.included_count(), 4u);
  std::vector<double> all;
  d.for_each_included([&](const PersistencePoint& p) { all.push_back(p.death); });
  EXPECT_EQ(all, (std::vector<double>{1.0, 0.5, 0.5, 0.0}));
}

TEST(Diagram, ConstantLayerHasZeroPersistence) {
  const auto d = compute_diagram(WeightedBipartiteLayer::dense(5, 7, std::vector<double>(35, -3.0)), 3.0);
  EXPECT_EQ(d.finite_count(), 11u);
  for (const auto& p : d.points()) EXPECT_EQ(p.persistence(), 0.0);
}

TEST(Diagram, DisconnectedSparseGroups) {
  const auto layer = WeightedBipartiteLayer::sparse(2, 2, {{0, 0, 1.0}, {1, 1, 0.5}});
  const auto d = compute_diagram(layer, 1.0);
  EXPECT_EQ(d.essential_count(), 2u);
  EXPECT_EQ(d.deaths(), (std::vector<double>{1.0, 0.5}));
}

TEST(Oracle, SmallExamples) {
  EXPECT_EQ(mst_oracle(k22(), 1.0), (std::vector<double>{1.0, 0.5, 0.5}));
  EXPECT_EQ(mst_oracle(WeightedBipartiteLayer::dense(1, 1, {-0.25}), 0.5), std::vector<double>{0.5});
  EXPECT_EQ(mst_oracle(WeightedBipartiteLayer::dense(3, 3, std::vector<double>(9, 2.0)), 2.0),
            std::vector<double>(5, 1.0));
}

// Three routes to the same forest: union-find, Prim and exhaustive search.
TEST(Oracle, BruteForceAgreesOnTinyLayers) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const auto layer = testing::random_layer(rng, static_cast<testing::WeightKind>(i % 3), 3);
    if (layer.edge_count() > 9) continue;
    const double g = layer.max_abs_weight();
    const auto brute = testing::brute_force_forest(layer, g);
    EXPECT_EQ(sorted_desc(compute_diagram(layer, g).deaths()), brute);
    EXPECT_EQ(mst_oracle(layer, g), brute);
  }
}

TEST(Diagram, CardinalityAndMonotoneDeaths) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto layer = testing::random_layer(rng, static_cast<testing::WeightKind>(i % 3));
    const auto d = compute_diagram(layer, layer.max_abs_weight());
    // Dense layers are connected: n - 1 finite points, one essential.
    EXPECT_EQ(d.finite_count(), layer.vertex_count() - 1);
    EXPECT_EQ(d.essential_count(), 1u);
    const auto deaths = d.deaths();
    EXPECT_TRUE(std::is_sorted(deaths.begin(), deaths.end(), std::greater<>()));
    for (double x : deaths) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
  }
}

TEST(Diagram, GlobalMaxLargerThanLayerMax) {
  const auto d = compute_diagram(k22(), 4.0);
  EXPECT_EQ(d.deaths(), (std::vector<double>{0.25, 0.125, 0.125}));
}

TEST(Diagram, Deterministic) {
  std::mt19937_64 rng(3);
  const auto layer = testing::random_layer(rng, testing::WeightKind::discrete);
  EXPECT_EQ(compute_diagram(layer, 1.0), compute_diagram(layer, 1.0));
}

TEST(Diagram, ScaleInvariantOnExactlyScalableWeights) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto layer = testing::scalable_layer(rng);
    const auto base = compute_diagram(layer, layer.max_abs_weight());
    for (double c : {1e-6, 1e6}) {
      const auto scaled = layer.map_weights([c](double w) { return c * w; });
      EXPECT_EQ(compute_diagram(scaled, scaled.max_abs_weight()), base);
    }
  }
}

TEST(Layer, Validation) {
  EXPECT_THROW(WeightedBipartiteLayer::dense(0, 2, {}), InvalidArgument);
  EXPECT_THROW(WeightedBipartiteLayer::dense(2, 2, {1.0, 2.0, 3.0}), InvalidArgument);
  EXPECT_THROW(WeightedBipartiteLayer::dense(1, 1, {std::nan("")}), InvalidArgument);
  EXPECT_THROW(WeightedBipartiteLayer::sparse(1, 1, {{0, 1, 1.0}}), InvalidArgument);
  EXPECT_THROW(WeightedBipartiteLayer::sparse(1, 2, {{0, 1, 1.0}, {0, 1, 2.0}}), InvalidArgument);
}

}  // namespace
}  // namespace npers
