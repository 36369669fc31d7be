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
//
// Shared fixtures: hand-built tables and a memoized designer.
#pragma once

#include <cmath>
#include <map>
#include <tuple>

#include "imvu/designer.hpp"
#include "imvu/mechanism.hpp"

namespace imvu::testing {

// Randomized response with p = e^eps / (1 + e^eps) and the unbiased
// alphabet (-1/(e^eps - 1), e^eps/(e^eps - 1)).
inline MechanismTable RandomizedResponse(double eps) {
  const double e = std::exp(eps);
  const double p = e / (1.0 + e);
  return MechanismTable::Create(
      {-1.0 / (e - 1.0), e / (e - 1.0)},
      {{std::log(p), std::log(1.0 - p)}, {std::log(1.0 - p), std::log(p)}},
      eps);
}

// The ln 3 instance: alphabet (-0.5, 1.5), rows (0.75, 0.25) / (0.25, 0.75).
inline MechanismTable Rr3() { return RandomizedResponse(std::log(3.0)); }

inline const MechanismTable& Designed(int b_in, int b_out, double eps) {
  static std::map<std::tuple<int, int, double>, MechanismTable> cache;
  const auto key = std::make_tuple(b_in, b_out, eps);
  auto it = cache.find(key);
  if (it == cache.end()) {
    DesignSpec spec;
    spec.b_in = b_in;
    spec.b_out = b_out;
    spec.eps = eps;
    it = cache.emplace(key, DesignMvu(spec)).first;
  }
  return it->second;
}

}  // namespace imvu::testing
