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
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "npers/errors.hpp"
#include "npers/layer.hpp"

namespace npers {

/// Unit counts of a feedforward network: input, hidden..., output.
struct MlpSpec {
  std::vector<std::size_t> layer_sizes;

  void validate() const {
    if (layer_sizes.size() < 2) throw InvalidArgument("an MLP needs at least two layer sizes");
    for (auto s : layer_sizes) {
      if (s == 0) throw InvalidArgument("layer sizes must be positive");
    }
  }

  std::size_t weight_layers() const noexcept { return layer_sizes.size() - 1; }
};

/// Weight distribution used to initialise a network.
struct InitScheme {
  enum class Kind { xavier, xavier_uniform, gaussian, uniform, beta, constant };

  Kind kind = Kind::xavier;
  double a = 0.0;
  double b = 0.0;

  /// Glorot normal, truncated at two standard deviations.
  static InitScheme xavier() { return {Kind::xavier, 0.0, 0.0}; }
  static InitScheme xavier_uniform() { return {Kind::xavier_uniform, 0.0, 0.0}; }
  static InitScheme gaussian(double sigma) { return {Kind::gaussian, sigma, 0.0}; }
  static InitScheme uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
  static InitScheme beta(double alpha, double beta) { return {Kind::beta, alpha, beta}; }
  static InitScheme constant(double value) { return {Kind::constant, value, 0.0}; }

  void validate() const {
    switch (kind) {
      case Kind::gaussian:
        if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("gaussian sigma must be > 0");
        break;
      case Kind::uniform:
        if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
          throw InvalidArgument("uniform bounds must satisfy lo < hi");
        }
        break;
      case Kind::beta:
        if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
          throw InvalidArgument("beta parameters must be > 0");
        }
        break;
      case Kind::constant:
        if (!std::isfinite(a)) throw InvalidArgument("constant init must be finite");
        break;
      case Kind::xavier:
      case Kind::xavier_uniform:
        break;
    }
  }
};

/// Parses "xavier", "xavier_uniform", "gaussian[:sigma]", "uniform[:lo:hi]",
/// "beta[:alpha:beta]", "constant:value". Defaults: gaussian sigma 1,
/// uniform [-1, 1], beta(0.005, 0.5).
inline InitScheme parse_init_scheme(std::string_view text) {
  std::vector<std::string> parts;
  std::stringstream ss{std::string(text)};
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw InvalidArgument("empty init scheme");
  auto num = [&](std::size_t i, double fallback) {
    if (i >= parts.size()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw InvalidArgument("");
      return v;
    } catch (const std::exception&) {
      throw InvalidArgument("bad number '" + parts[i] + "' in init scheme");
    }
  };
  const auto& name = parts[0];
  InitScheme s;
  if (name == "xavier") {
    s = InitScheme::xavier();
  } else if (name == "xavier_uniform") {
    s = InitScheme::xavier_uniform();
  } else if (name == "gaussian") {
    s = InitScheme::gaussian(num(1, 1.0));
  } else if (name == "uniform") {
    s = InitScheme::uniform(num(1, -1.0), num(2, 1.0));
  } else if (name == "beta") {
    s = InitScheme::beta(num(1, 0.005), num(2, 0.5));
  } else if (name == "constant") {
    s = InitScheme::constant(num(1, 0.0));
  } else {
    throw InvalidArgument("unknown init scheme '" + name + "'");
  }
  s.validate();
  return s;
}

namespace detail {

inline double sample_beta(double alpha, double beta, std::mt19937_64& rng) {
  std::gamma_distribution<double> ga(alpha, 1.0);
  std::gamma_distribution<double> gb(beta, 1.0);
  for (;;) {
    const double x = ga(rng);
    const double y = gb(rng);
    if (x + y > 0.0) return x / (x + y);
  }
}

}  // namespace detail

/// Samples the weight matrices of `spec` (layer k is sizes[k+1] x sizes[k]),
/// layer by layer in row-major order. Deterministic in `seed`.
inline NetworkSnapshot init_weights(const MlpSpec& spec, const InitScheme& scheme,
                                    std::uint64_t seed) {
  spec.validate();
  scheme.validate();
  std::mt19937_64 rng(seed);
  NetworkSnapshot net;
  net.step = 0;
  for (std::size_t k = 0; k + 1 < spec.layer_sizes.size(); ++k) {
    const std::size_t in = spec.layer_sizes[k];
    const std::size_t out = spec.layer_sizes[k + 1];
    const double fan = static_cast<double>(in + out);
    std::vector<double> w(in * out);
    switch (scheme.kind) {
      case InitScheme::Kind::xavier: {
        // Truncated normal with the variance of the untruncated 2/(fan_in + fan_out).
        const double sd = std::sqrt(2.0 / fan) / 0.87962566103423978;
        std::normal_distribution<double> normal(0.0, sd);
        for (auto& x : w) {
          do {
            x = normal(rng);
          } while (std::abs(x) > 2.0 * sd);
        }
        break;
      }
      case InitScheme::Kind::xavier_uniform: {
        const double limit = std::sqrt(6.0 / fan);
        std::uniform_real_distribution<double> uni(-limit, limit);
        for (auto& x : w) x = uni(rng);
        break;
      }
      case InitScheme::Kind::gaussian: {
        std::normal_distribution<double> normal(0.0, scheme.a);
        for (auto& x : w) x = normal(rng);
        break;
      }
      case InitScheme::Kind::uniform: {
        std::uniform_real_distribution<double> uni(scheme.a, scheme.b);
        for (auto& x : w) x = uni(rng);
        break;
      }
      case InitScheme::Kind::beta:
        for (auto& x : w) x = detail::sample_beta(scheme.a, scheme.b, rng);
        break;
      case InitScheme::Kind::constant:
        for (auto& x : w) x = scheme.a;
        break;
    }
    net.layers.push_back(WeightedBipartiteLayer::dense(out, in, std::move(w)));
  }
  return net;
}

}  // namespace npers
