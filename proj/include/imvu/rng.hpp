// Copyright 2026 The imvu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace imvu {

// All randomness in the library is drawn from this engine type. Every
// consumer takes it by reference so a single seeded root can be threaded
// through a whole run.
using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits. Unlike
// std::uniform_real_distribution this is bit-identical across standard
// library implementations.
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1).
inline double UniformOpen01(Rng& rng) {
  double u;
  do {
    u = Uniform01(rng);
  } while (u == 0.0);
  return u;
}

// Standard normal via Box-Muller. Portable, unlike std::normal_distribution.
inline double StandardNormal(Rng& rng) {
  const double u1 = UniformOpen01(rng);
  const double u2 = Uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Laplace(0, scale) by inverse CDF.
inline double Laplace(Rng& rng, double scale) {
  const double u = UniformOpen01(rng) - 0.5;
  return u < 0 ? scale * std::log1p(2.0 * u) : -scale * std::log1p(-2.0 * u);
}

// Derives an independent engine for substream `index` under `key`. Used to
// give each fixed-size coordinate block its own stream so results do not
// depend on how blocks are distributed across workers.
inline Rng Substream(std::uint64_t key, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(key),
                    static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), 0x9e3779b9u};
  return Rng(seq);
}

// Named substream of a root seed (FNV-1a over the name, mixed with the seed).
inline Rng NamedStream(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return Substream(seed, h);
}

}  // namespace imvu
