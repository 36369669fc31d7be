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
// Designed MVU tables and the interpolated (exponential-family) mechanism
// built on top of them.
//
// A table fixes B_in uniformly spaced input grid points on [0,1], an
// ascending output alphabet of B_out values and, for every grid point, a
// strictly positive categorical distribution over the alphabet. The
// interpolated mechanism extends the table to every real input by
// interpolating the natural parameters (log-probabilities) linearly between
// neighbouring grid points and sampling from the resulting softmax.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "imvu/error.hpp"
#include "imvu/rng.hpp"
#include "imvu/validation.hpp"

namespace imvu {

using Vector = std::vector<double>;
using Matrix = std::vector<Vector>;

enum class Norm { kL1, kL2 };

inline std::string NormName(Norm norm) {
  return norm == Norm::kL1 ? "l1" : "l2";
}

inline Norm ParseNorm(std::string_view name) {
  if (name == "l1" || name == "L1") return Norm::kL1;
  if (name == "l2" || name == "L2") return Norm::kL2;
  throw Error(ErrorKind::kInput, "unknown norm '" + std::string(name) + "'");
}

struct ClipConfig {
  Norm norm = Norm::kL2;
  double clip_c = 1.0;
};

namespace internal {

inline double LogSumExp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline Vector Softmax(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  Vector out(v.size());
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out[j] = std::exp(v[j] - m);
    s += out[j];
  }
  for (double& p : out) p /= s;
  return out;
}

inline Vector UniformGrid(int b_in) {
  Vector grid(b_in);
  for (int i = 0; i < b_in; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(b_in - 1);
  }
  grid.front() = 0.0;
  grid.back() = 1.0;
  return grid;
}

inline Matrix Exp(const Matrix& m) {
  Matrix out = m;
  for (auto& row : out) {
    for (double& v : row) v = std::exp(v);
  }
  return out;
}

}  // namespace internal

// Per-check tolerances enforced whenever a MechanismTable is constructed.
struct TableTolerances {
  double simplex = 1e-9;
  double unbiased = 1e-6;
  double metric_dp = 1e-9;
  double grid = 1e-12;
};

// An immutable, validated MVU design. Only constructible through Create(),
// which checks every invariant.
class MechanismTable {
 public:
  // Builds a table on the uniform grid with `log_probs.size()` points.
  // Throws Error(kValidation) naming the first failed check.
  static MechanismTable Create(Vector alphabet, Matrix log_probs,
                               double design_eps,
                               const TableTolerances& tol = {}) {
    if (log_probs.size() < 2) {
      throw Error(ErrorKind::kValidation, "b_in must be at least 2");
    }
    Vector grid = internal::UniformGrid(static_cast<int>(log_probs.size()));
    return Create(std::move(grid), std::move(alphabet), std::move(log_probs),
                  design_eps, tol);
  }

  // As above with an explicit grid (used by the file loader, which must
  // reject non-uniform grids rather than silently replace them).
  static MechanismTable Create(Vector grid, Vector alphabet, Matrix log_probs,
                               double design_eps,
                               const TableTolerances& tol = {}) {
    RawTable raw;
    raw.grid = grid;
    raw.alphabet = alphabet;
    raw.probs = internal::Exp(log_probs);
    raw.design_eps = design_eps;
    for (const auto& row : log_probs) {
      for (double v : row) {
        if (!std::isfinite(v)) {
          throw Error(ErrorKind::kValidation,
                      "positivity: log-probabilities must be finite");
        }
      }
    }
    ValidationReport report = ValidateRaw(raw, tol.simplex, tol.unbiased,
                                          tol.metric_dp, tol.grid);
    if (!report.passed()) {
      throw Error(ErrorKind::kValidation, report.FirstFailure());
    }
    MechanismTable t;
    t.grid_ = std::move(grid);
    t.alphabet_ = std::move(alphabet);
    t.log_probs_ = std::move(log_probs);
    t.design_eps_ = design_eps;
    return t;
  }

  int b_in() const { return static_cast<int>(grid_.size()); }
  int b_out() const { return static_cast<int>(alphabet_.size()); }
  double spacing() const { return 1.0 / static_cast<double>(b_in() - 1); }
  double design_eps() const { return design_eps_; }
  const Vector& grid() const { return grid_; }
  const Vector& alphabet() const { return alphabet_; }
  const Matrix& log_probs() const { return log_probs_; }

  Vector probs(int i) const {
    Vector p = log_probs_.at(i);
    for (double& v : p) v = std::exp(v);
    return p;
  }

  RawTable ToRaw() const {
    return RawTable{grid_, alphabet_, internal::Exp(log_probs_), design_eps_};
  }

 private:
  MechanismTable() = default;

  Vector grid_;
  Vector alphabet_;
  Matrix log_probs_;
  double design_eps_ = 0.0;
};

// A table together with the client-side input transform and the privacy
// constants the accountant certified for it.
class InterpolatedMechanism {
 public:
  InterpolatedMechanism(MechanismTable table, double beta, ClipConfig clip,
                        std::optional<double> eps_prime = std::nullopt,
                        std::optional<double> fisher_m = std::nullopt)
      : table_(std::move(table)),
        beta_(beta),
        clip_(clip),
        eps_prime_(eps_prime),
        fisher_m_(fisher_m) {
    if (!(beta_ > 0.0) || !std::isfinite(beta_)) {
      throw Error(ErrorKind::kInput, "beta must be positive");
    }
    if (!(clip_.clip_c > 0.0) || !std::isfinite(clip_.clip_c)) {
      throw Error(ErrorKind::kInput, "clip_c must be positive");
    }
    if (eps_prime_ && !(*eps_prime_ >= 0.0)) {
      throw Error(ErrorKind::kInput, "eps_prime must be non-negative");
    }
    if (fisher_m_ && !(*fisher_m_ >= 0.0)) {
      throw Error(ErrorKind::kInput, "fisher_m must be non-negative");
    }
    if (fisher_m_ && table_.b_in() != 2) {
      throw Error(ErrorKind::kInput,
                  "fisher_m is only defined for tables with b_in = 2");
    }
  }

  explicit InterpolatedMechanism(MechanismTable table)
      : InterpolatedMechanism(std::move(table), 1.0, ClipConfig{}) {}

  const MechanismTable& table() const { return table_; }
  double beta() const { return beta_; }
  const ClipConfig& clip() const { return clip_; }
  std::optional<double> eps_prime() const { return eps_prime_; }
  std::optional<double> fisher_m() const { return fisher_m_; }

 private:
  MechanismTable table_;
  double beta_;
  ClipConfig clip_;
  std::optional<double> eps_prime_;
  std::optional<double> fisher_m_;
};

// Natural parameters of every grid row; identical to the stored log-probs.
inline Matrix NaturalParams(const MechanismTable& table) {
  return table.log_probs();
}

// Index i of the interval [x_i, x_{i+1}] whose affine rule applies at x.
// Inputs left of 0 use the first interval, right of 1 the last one.
inline int IntervalIndex(const MechanismTable& table, double x) {
  const int last = table.b_in() - 2;
  const double pos = x * static_cast<double>(table.b_in() - 1);
  if (!(pos > 0.0)) return 0;
  if (pos >= static_cast<double>(last)) return last;
  return std::clamp(static_cast<int>(std::floor(pos)), 0, last);
}

inline Vector InterpolateEta(const MechanismTable& table, double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorKind::kInput, "interpolation input must be finite");
  }
  const auto& grid = table.grid();
  const auto& eta = table.log_probs();
  for (int i = 0; i < table.b_in(); ++i) {
    if (grid[i] == x) return eta[i];
  }
  const int i = IntervalIndex(table, x);
  const double w_hi = (x - grid[i]) / table.spacing();
  const double w_lo = (grid[i + 1] - x) / table.spacing();
  Vector out(table.b_out());
  for (int j = 0; j < table.b_out(); ++j) {
    out[j] = w_lo * eta[i][j] + w_hi * eta[i + 1][j];
  }
  return out;
}

inline Vector InterpolateEta(const InterpolatedMechanism& mech, double x) {
  return InterpolateEta(mech.table(), x);
}

inline Vector Pmf(const MechanismTable& table, double x) {
  return internal::Softmax(InterpolateEta(table, x));
}

inline Vector Pmf(const InterpolatedMechanism& mech, double x) {
  return Pmf(mech.table(), x);
}

// log P(j | eta(x)) for every j, without leaving the log domain.
inline Vector LogPmf(const MechanismTable& table, double x) {
  Vector eta = InterpolateEta(table, x);
  const double a = internal::LogSumExp(eta);
  for (double& v : eta) v -= a;
  return eta;
}

// Inverse-CDF draw from a probability vector: the first j with u < F(j).
inline int SampleIndex(std::span<const double> pmf, double u) {
  double cum = 0.0;
  int last_positive = 0;
  for (std::size_t j = 0; j < pmf.size(); ++j) {
    cum += pmf[j];
    if (pmf[j] > 0.0) last_positive = static_cast<int>(j);
    if (u < cum) return static_cast<int>(j);
  }
  return last_positive;
}

struct Sample {
  int index;
  double value;
};

inline Sample SampleAt(const MechanismTable& table, double x, Rng& rng) {
  const Vector p = Pmf(table, x);
  const int j = SampleIndex(p, Uniform01(rng));
  return Sample{j, table.alphabet()[j]};
}

inline Sample SampleAt(const InterpolatedMechanism& mech, double x, Rng& rng) {
  return SampleAt(mech.table(), x, rng);
}

struct Moments {
  double mean;
  double variance;
};

inline Moments MomentsOf(std::span<const double> alphabet,
                         std::span<const double> pmf) {
  double mean = 0.0;
  for (std::size_t j = 0; j < pmf.size(); ++j) mean += alphabet[j] * pmf[j];
  double var = 0.0;
  for (std::size_t j = 0; j < pmf.size(); ++j) {
    const double d = alphabet[j] - mean;
    var += d * d * pmf[j];
  }
  return Moments{mean, var};
}

inline Moments MomentsAt(const MechanismTable& table, double x) {
  return MomentsOf(table.alphabet(), Pmf(table, x));
}

inline Moments MomentsAt(const InterpolatedMechanism& mech, double x) {
  return MomentsAt(mech.table(), x);
}

// Baseline MVU: randomized dithering between the two bracketing grid rows,
// i.e. linear interpolation of the probability vectors. Defined on [0,1].
inline Vector MvuDitherPmf(const MechanismTable& table, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorKind::kInput, "dithering input must lie in [0, 1]");
  }
  const auto& grid = table.grid();
  for (int i = 0; i < table.b_in(); ++i) {
    if (grid[i] == x) return table.probs(i);
  }
  const int i = IntervalIndex(table, x);
  const double w_hi = (x - grid[i]) / table.spacing();
  const double w_lo = (grid[i + 1] - x) / table.spacing();
  const Vector lo = table.probs(i);
  const Vector hi = table.probs(i + 1);
  Vector out(table.b_out());
  for (int j = 0; j < table.b_out(); ++j) out[j] = w_lo * lo[j] + w_hi * hi[j];
  return out;
}

inline double NormOf(std::span<const double> u, Norm norm) {
  double s = 0.0;
  if (norm == Norm::kL1) {
    for (double v : u) s += std::abs(v);
    return s;
  }
  for (double v : u) s += v * v;
  return std::sqrt(s);
}

inline Vector Clip(std::span<const double> u, const ClipConfig& cfg) {
  Vector out(u.begin(), u.end());
  const double n = NormOf(u, cfg.norm);
  if (n <= cfg.clip_c) return out;
  const double scale = cfg.clip_c / n;
  for (double& v : out) v *= scale;
  return out;
}

inline double ScaleInput(double u, double clip_c, double beta) {
  return 0.5 + beta * u / (2.0 * clip_c);
}

inline double Decode(double a, double clip_c, double beta) {
  return (2.0 * clip_c / beta) * (a - 0.5);
}

struct PrivatizedVector {
  std::vector<std::uint32_t> indices;  // wire form: one alphabet index each
  Vector decoded;                      // server-side real values
};

// Coordinates per RNG substream. Fixed so that the output does not depend on
// the worker count.
inline constexpr std::size_t kSubstreamBlock = 256;

// Clip, scale and privatize every coordinate independently. One 64-bit key is
// drawn from `rng`; coordinate block b then samples from Substream(key, b).
inline PrivatizedVector PrivatizeVector(const InterpolatedMechanism& mech,
                                        std::span<const double> u, Rng& rng,
                                        int workers = 1) {
  if (u.empty()) {
    throw Error(ErrorKind::kInput, "cannot privatize a zero-dimensional vector");
  }
  for (double v : u) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kInput, "input vector must be finite");
    }
  }
  const std::uint64_t key = rng();
  const Vector clipped = Clip(u, mech.clip());
  const std::size_t d = clipped.size();
  PrivatizedVector out{std::vector<std::uint32_t>(d), Vector(d)};

  const std::size_t blocks = (d + kSubstreamBlock - 1) / kSubstreamBlock;
  auto run_blocks = [&](std::size_t first, std::size_t stride) {
    for (std::size_t b = first; b < blocks; b += stride) {
      Rng sub = Substream(key, b);
      const std::size_t end = std::min(d, (b + 1) * kSubstreamBlock);
      for (std::size_t k = b * kSubstreamBlock; k < end; ++k) {
        const double x =
            ScaleInput(clipped[k], mech.clip().clip_c, mech.beta());
        const Sample s = SampleAt(mech, x, sub);
        out.indices[k] = static_cast<std::uint32_t>(s.index);
        out.decoded[k] = Decode(s.value, mech.clip().clip_c, mech.beta());
      }
    }
  };

  const std::size_t n_workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)),
                              1, blocks);
  if (n_workers == 1) {
    run_blocks(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back(run_blocks, w, n_workers);
  }
  for (auto& t : pool) t.join();
  return out;
}

// Bits needed on the wire per coordinate: ceil(log2(B_out)).
inline int BitsPerCoordinate(const MechanismTable& table) {
  int bits = 0;
  while ((1 << bits) < table.b_out()) ++bits;
  return bits;
}

}  // namespace imvu
