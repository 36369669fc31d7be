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
// Bias/variance sweeps and distributed mean estimation.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "imvu/baselines.hpp"
#include "imvu/error.hpp"
#include "imvu/mechanism.hpp"
#include "imvu/rng.hpp"

namespace imvu {

inline constexpr int kSweepPoints = 201;

struct SweepRow {
  std::string mechanism;  // "imvu" or "mvu"
  int b_in = 0;
  double x = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double variance = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double laplace_variance = 0.0;

  // Largest |bias| among rows of one mechanism and table size.
  double MaxAbsBias(std::string_view mechanism, int b_in) const {
    double worst = 0.0;
    for (const auto& r : rows) {
      if (r.mechanism == mechanism && r.b_in == b_in) {
        worst = std::max(worst, std::abs(r.bias));
      }
    }
    return worst;
  }

  std::pair<double, double> VarianceRange(std::string_view mechanism,
                                          int b_in) const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& r : rows) {
      if (r.mechanism == mechanism && r.b_in == b_in) {
        lo = std::min(lo, r.variance);
        hi = std::max(hi, r.variance);
      }
    }
    return {lo, hi};
  }

  std::string ToCsv() const {
    std::ostringstream os;
    os.precision(17);
    os << "mechanism,b_in,x,mean,bias,variance,laplace_ref\n";
    for (const auto& r : rows) {
      os << r.mechanism << ',' << r.b_in << ',' << r.x << ',' << r.mean << ','
         << r.bias << ',' << r.variance << ',' << laplace_variance << '\n';
    }
    return os.str();
  }
};

inline Vector SweepGrid(int points = kSweepPoints) {
  if (points < 2) throw Error(ErrorKind::kInput, "sweep needs >= 2 points");
  Vector x(points);
  for (int k = 0; k < points; ++k) {
    x[k] = static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return x;
}

// Closed-form moments of I-MVU and MVU dithering for each table at each x,
// in table order then x order. All tables must share B_out and design eps.
inline SweepReport SweepBiasVariance(const std::vector<MechanismTable>& tables,
                                     const Vector& x_grid, double eps) {
  if (tables.empty()) throw Error(ErrorKind::kInput, "no tables to sweep");
  for (const auto& t : tables) {
    if (t.b_out() != tables[0].b_out()) {
      throw Error(ErrorKind::kInput, "tables differ in b_out");
    }
    if (std::abs(t.design_eps() - eps) > 1e-12 * std::max(1.0, eps)) {
      throw Error(ErrorKind::kInput, "table design eps differs from sweep eps");
    }
  }
  SweepReport report;
  report.laplace_variance = 2.0 / (eps * eps);
  for (const auto& t : tables) {
    for (const char* name : {"imvu", "mvu"}) {
      const bool interp = name[0] == 'i';
      for (double x : x_grid) {
        const Moments m = interp ? MomentsAt(t, x)
                                 : MomentsOf(t.alphabet(), MvuDitherPmf(t, x));
        report.rows.push_back({name, t.b_in(), x, m.mean, m.mean - x,
                               m.variance});
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Distributed mean estimation.

enum class DmeMechanism { kIdentity, kImvu, kMvu, kLaplace, kGaussian, kSignSgd };

inline std::string DmeMechanismName(DmeMechanism m) {
  switch (m) {
    case DmeMechanism::kIdentity:
      return "identity";
    case DmeMechanism::kImvu:
      return "imvu";
    case DmeMechanism::kMvu:
      return "mvu";
    case DmeMechanism::kLaplace:
      return "laplace";
    case DmeMechanism::kGaussian:
      return "gaussian";
    case DmeMechanism::kSignSgd:
      return "signsgd";
  }
  return "unknown";
}

inline DmeMechanism ParseDmeMechanism(std::string_view s) {
  for (auto m : {DmeMechanism::kIdentity, DmeMechanism::kImvu,
                 DmeMechanism::kMvu, DmeMechanism::kLaplace,
                 DmeMechanism::kGaussian, DmeMechanism::kSignSgd}) {
    if (DmeMechanismName(m) == s) return m;
  }
  throw Error(ErrorKind::kInput, "unknown mechanism '" + std::string(s) + "'");
}

// Client vectors: iid coordinates, uniform on [-scale, scale] or
// N(0, scale^2).
enum class InputDist { kUniform, kGaussian };

inline InputDist ParseInputDist(std::string_view s) {
  if (s == "uniform") return InputDist::kUniform;
  if (s == "gaussian") return InputDist::kGaussian;
  throw Error(ErrorKind::kInput, "unknown input distribution '" +
                                     std::string(s) + "'");
}

struct DmeConfig {
  DmeMechanism mechanism = DmeMechanism::kIdentity;
  InputDist input = InputDist::kUniform;
  double input_scale = 1.0;
  // Used by imvu and mvu. MVU dithering needs beta <= 1 so that scaled
  // inputs stay in [0, 1].
  std::optional<InterpolatedMechanism> mech;
  BaselineConfig baseline;  // used by laplace, gaussian, signsgd
};

struct DmeResult {
  double mse = 0.0;  // mean over trials of ||estimate - true mean||_2^2
  double bits_per_coord = 0.0;
};

namespace internal {

inline Vector DmeMessage(std::span<const double> u, const DmeConfig& cfg,
                         Rng& rng) {
  switch (cfg.mechanism) {
    case DmeMechanism::kIdentity:
      return Vector(u.begin(), u.end());
    case DmeMechanism::kImvu:
      return PrivatizeVector(*cfg.mech, u, rng).decoded;
    case DmeMechanism::kMvu: {
      const InterpolatedMechanism& m = *cfg.mech;
      const Vector clipped = Clip(u, m.clip());
      Vector out(clipped.size());
      for (std::size_t k = 0; k < clipped.size(); ++k) {
        const double x = ScaleInput(clipped[k], m.clip().clip_c, m.beta());
        const Vector p = MvuDitherPmf(m.table(), x);
        const int j = SampleIndex(p, Uniform01(rng));
        out[k] = Decode(m.table().alphabet()[j], m.clip().clip_c, m.beta());
      }
      return out;
    }
    case DmeMechanism::kLaplace:
      return LaplaceMech(u, cfg.baseline, rng);
    case DmeMechanism::kGaussian:
      return GaussianMech(u, cfg.baseline, rng);
    case DmeMechanism::kSignSgd:
      return SignSgd(u, cfg.baseline, rng);
  }
  return {};
}

}  // namespace internal

inline double DmeBitsPerCoord(const DmeConfig& cfg) {
  switch (cfg.mechanism) {
    case DmeMechanism::kImvu:
    case DmeMechanism::kMvu:
      return BitsPerCoordinate(cfg.mech->table());
    case DmeMechanism::kSignSgd:
      return 1.0;
    default:
      return 32.0;
  }
}

// Average over `trials` of the squared L2 error of the server mean of
// decoded messages against the true mean of the raw client vectors.
inline DmeResult DmeMse(int n_clients, int d, const DmeConfig& cfg, Rng& rng,
                        int trials) {
  if (n_clients < 1 || d < 1 || trials < 1) {
    throw Error(ErrorKind::kInput, "n_clients, d and trials must be >= 1");
  }
  if ((cfg.mechanism == DmeMechanism::kImvu ||
       cfg.mechanism == DmeMechanism::kMvu) &&
      !cfg.mech) {
    throw Error(ErrorKind::kState, "mechanism table not provided");
  }
  double total = 0.0;
  Vector client(d);
  for (int t = 0; t < trials; ++t) {
    Vector truth(d, 0.0), est(d, 0.0);
    for (int c = 0; c < n_clients; ++c) {
      for (double& v : client) {
        v = cfg.input == InputDist::kUniform
                ? cfg.input_scale * (2.0 * Uniform01(rng) - 1.0)
                : cfg.input_scale * StandardNormal(rng);
      }
      const Vector msg = internal::DmeMessage(client, cfg, rng);
      for (int k = 0; k < d; ++k) {
        truth[k] += client[k];
        est[k] += msg[k];
      }
    }
    double err = 0.0;
    for (int k = 0; k < d; ++k) {
      const double diff = (est[k] - truth[k]) / n_clients;
      err += diff * diff;
    }
    total += err;
  }
  return {total / trials, DmeBitsPerCoord(cfg)};
}

}  // namespace imvu
