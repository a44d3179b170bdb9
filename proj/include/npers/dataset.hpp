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
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "npers/errors.hpp"

namespace npers {

/// Labelled feature rows with a disjoint train/validation/test split.
struct SyntheticDataset {
  std::size_t dims = 0;
  std::size_t classes = 0;
  std::vector<double> features;  // row-major, size() x dims
  std::vector<int> labels;
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const noexcept {
    return {features.data() + i * dims, dims};
  }
};

struct SplitFractions {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

enum class DatasetPreset { blobs, rings, xor_grid };

inline DatasetPreset parse_preset(std::string_view name) {
  if (name == "blobs") return DatasetPreset::blobs;
  if (name == "rings") return DatasetPreset::rings;
  if (name == "xor") return DatasetPreset::xor_grid;
  throw InvalidArgument("unknown dataset preset '" + std::string(name) + "'");
}

struct DatasetOptions {
  std::size_t samples = 1000;
  std::size_t dims = 20;
  std::size_t classes = 4;
  /// Blobs: dimensions along which class centres differ; the rest is noise.
  std::size_t informative = 4;
  double separation = 3.0;
  double noise = 1.0;
  std::uint64_t seed = 0;
  SplitFractions split;
};

namespace detail {

inline void validate(const DatasetOptions& o, std::size_t min_dims) {
  if (o.samples < 3) throw InvalidArgument("dataset needs at least 3 samples");
  if (o.dims < min_dims) {
    throw InvalidArgument("preset needs at least " + std::to_string(min_dims) + " dimensions");
  }
  if (o.classes < 2) throw InvalidArgument("dataset needs at least 2 classes");
  if (o.samples > 2000) throw InvalidArgument("synthetic datasets are capped at 2000 samples");
  const auto& s = o.split;
  if (s.train <= 0.0 || s.validation < 0.0 || s.test < 0.0 ||
      std::abs(s.train + s.validation + s.test - 1.0) > 1e-9) {
    throw InvalidArgument("split fractions must be non-negative and sum to 1");
  }
}

inline void assign_split(SyntheticDataset& data, const SplitFractions& split, std::mt19937_64& rng) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n = static_cast<double>(order.size());
  const auto n_train = static_cast<std::size_t>(std::llround(n * split.train));
  const auto n_val = std::min(order.size() - n_train,
                              static_cast<std::size_t>(std::llround(n * split.validation)));
  data.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  data.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                         order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  data.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
}

}  // namespace detail

/// Gaussian clusters: class centres drawn on the informative dimensions,
/// isotropic noise on every dimension.
inline SyntheticDataset make_blobs(const DatasetOptions& o) {
  detail::validate(o, 1);
  const std::size_t informative = std::clamp<std::size_t>(o.informative, 1, o.dims);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> centres(o.classes * o.dims, 0.0);
  for (std::size_t c = 0; c < o.classes; ++c) {
    for (std::size_t j = 0; j < informative; ++j) centres[c * o.dims + j] = o.separation * normal(rng);
  }
  SyntheticDataset data;
  data.dims = o.dims;
  data.classes = o.classes;
  data.features.resize(o.samples * o.dims);
  data.labels.resize(o.samples);
  for (std::size_t i = 0; i < o.samples; ++i) {
    const std::size_t c = i % o.classes;
    data.labels[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < o.dims; ++j) {
      data.features[i * o.dims + j] = centres[c * o.dims + j] + o.noise * normal(rng);
    }
  }
  detail::assign_split(data, o.split, rng);
  return data;
}

/// Concentric rings in the first two dimensions, class c at radius
/// (c + 1) * separation; the remaining dimensions carry noise only.
inline SyntheticDataset make_rings(const DatasetOptions& o) {
  detail::validate(o, 2);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  SyntheticDataset data;
  data.dims = o.dims;
  data.classes = o.classes;
  data.features.resize(o.samples * o.dims);
  data.labels.resize(o.samples);
  const double radial_noise = 0.15 * o.separation * o.noise;
  for (std::size_t i = 0; i < o.samples; ++i) {
    const std::size_t c = i % o.classes;
    data.labels[i] = static_cast<int>(c);
    const double r = static_cast<double>(c + 1) * o.separation + radial_noise * normal(rng);
    const double a = angle(rng);
    double* x = data.features.data() + i * o.dims;
    x[0] = r * std::cos(a);
    x[1] = r * std::sin(a);
    for (std::size_t j = 2; j < o.dims; ++j) x[j] = o.noise * normal(rng);
  }
  detail::assign_split(data, o.split, rng);
  return data;
}

/// Noisy XOR: the first two coordinates are uniform in
/// [-separation, separation]^2 and the label is the parity of their signs.
/// Always two classes.
inline SyntheticDataset make_xor(const DatasetOptions& o) {
  DatasetOptions two = o;
  two.classes = 2;
  detail::validate(two, 2);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> coord(-o.separation, o.separation);
  SyntheticDataset data;
  data.dims = o.dims;
  data.classes = 2;
  data.features.resize(o.samples * o.dims);
  data.labels.resize(o.samples);
  for (std::size_t i = 0; i < o.samples; ++i) {
    double* x = data.features.data() + i * o.dims;
    x[0] = coord(rng);
    x[1] = coord(rng);
    data.labels[i] = (x[0] > 0.0) != (x[1] > 0.0) ? 1 : 0;
    x[0] += 0.1 * o.noise * normal(rng);
    x[1] += 0.1 * o.noise * normal(rng);
    for (std::size_t j = 2; j < o.dims; ++j) x[j] = o.noise * normal(rng);
  }
  detail::assign_split(data, two.split, rng);
  return data;
}

inline SyntheticDataset make_dataset(DatasetPreset preset, const DatasetOptions& o) {
  switch (preset) {
    case DatasetPreset::blobs: return make_blobs(o);
    case DatasetPreset::rings: return make_rings(o);
    case DatasetPreset::xor_grid: return make_xor(o);
  }
  throw InvalidArgument("unknown dataset preset");
}

}  // namespace npers
