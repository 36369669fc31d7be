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
// Uncompressed (Laplace, Gaussian) and sign-compressed reference mechanisms.
#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "imvu/error.hpp"
#include "imvu/mechanism.hpp"
#include "imvu/rng.hpp"

namespace imvu {

enum class BaselineKind { kLaplace, kGaussian, kSignSgd };

inline std::string BaselineName(BaselineKind k) {
  switch (k) {
    case BaselineKind::kLaplace:
      return "laplace";
    case BaselineKind::kGaussian:
      return "gaussian";
    case BaselineKind::kSignSgd:
      return "signsgd";
  }
  return "unknown";
}

struct BaselineConfig {
  BaselineKind kind = BaselineKind::kGaussian;
  ClipConfig clip;
  double noise = 1.0;  // eps for laplace, noise multiplier sigma otherwise

  void Validate() const {
    if (!(noise > 0.0)) {
      throw Error(ErrorKind::kInput, "baseline noise parameter must be positive");
    }
    if (!(clip.clip_c > 0.0)) {
      throw Error(ErrorKind::kInput, "clip_c must be positive");
    }
    const bool want_l1 = kind == BaselineKind::kLaplace;
    if (want_l1 != (clip.norm == Norm::kL1)) {
      throw Error(ErrorKind::kInput, BaselineName(kind) + " requires " +
                                         (want_l1 ? "L1" : "L2") + " clipping");
    }
  }
};

// clip(u) + iid Laplace(C / eps). eps = inf returns the clipped input.
inline Vector LaplaceMech(std::span<const double> u, const BaselineConfig& cfg,
                          Rng& rng) {
  if (cfg.kind != BaselineKind::kLaplace) {
    throw Error(ErrorKind::kInput, "config is not a laplace baseline");
  }
  cfg.Validate();
  Vector out = Clip(u, cfg.clip);
  const double scale = cfg.clip.clip_c / cfg.noise;
  if (scale == 0.0) return out;
  for (double& v : out) v += Laplace(rng, scale);
  return out;
}

// clip(u) + iid N(0, (sigma C)^2).
inline Vector GaussianNoise(std::span<const double> u, const BaselineConfig& cfg,
                            Rng& rng) {
  cfg.Validate();
  Vector out = Clip(u, cfg.clip);
  const double sd = cfg.noise * cfg.clip.clip_c;
  for (double& v : out) v += sd * StandardNormal(rng);
  return out;
}

inline Vector GaussianMech(std::span<const double> u, const BaselineConfig& cfg,
                           Rng& rng) {
  if (cfg.kind != BaselineKind::kGaussian) {
    throw Error(ErrorKind::kInput, "config is not a gaussian baseline");
  }
  return GaussianNoise(u, cfg, rng);
}

// Sign of the Gaussian-mechanism output; exact zeros map to +1.
inline Vector SignSgd(std::span<const double> u, const BaselineConfig& cfg,
                      Rng& rng) {
  if (cfg.kind != BaselineKind::kSignSgd) {
    throw Error(ErrorKind::kInput, "config is not a signsgd baseline");
  }
  Vector out = GaussianNoise(u, cfg, rng);
  for (double& v : out) v = v < 0.0 ? -1.0 : 1.0;
  return out;
}

}  // namespace imvu
