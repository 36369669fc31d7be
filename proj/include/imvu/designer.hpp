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
// Numerical design of minimum-variance unbiased (MVU) tables.
//
// For a fixed output alphabet the MVU probabilities solve a linear program:
// minimize the summed variance over the grid subject to every row being a
// distribution, unbiased at its grid point, and L1-metric-DP with respect to
// every other row. The alphabet is restricted to the symmetric affine family
//
//   a_j = 1/2 + s * (2 (j - 1) / (B_out - 1) - 1)
//
// and the scale s is chosen by a coarse scan followed by golden-section
// refinement of the LP optimum.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "imvu/error.hpp"
#include "imvu/lp.hpp"
#include "imvu/mechanism.hpp"
#include "imvu/validation.hpp"

namespace imvu {

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr int kMaxDesignVariables = 4096;
inline constexpr int kGoldenIterations = 64;
inline constexpr int kScaleScanPoints = 32;
inline constexpr double kMaxLogRatio = 12.0;

struct DesignSpec {
  int b_in = 2;
  int b_out = 2;
  double eps = 1.0;
  // Outer search interval for the alphabet scale. Defaults to
  // [0.5, e^eps / (e^eps - 1) + 1], which brackets the randomized-response
  // optimum.
  std::optional<std::pair<double, double>> alphabet_scale_range;
  double lp_tol = 1e-6;
  bool symmetrize = true;

  std::pair<double, double> ScaleRange() const {
    if (alphabet_scale_range) return *alphabet_scale_range;
    const double e = std::exp(eps);
    const double hi = std::isfinite(e) ? e / (e - 1.0) + 1.0 : 2.0;
    return {0.5, hi};
  }

  void Validate() const {
    if (b_in < 2 || b_out < 2) {
      throw Error(ErrorKind::kInput, "b_in and b_out must be at least 2");
    }
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      throw Error(ErrorKind::kInput, "eps must be positive and finite");
    }
    if (!(lp_tol > 0.0 && lp_tol <= 1e-4)) {
      throw Error(ErrorKind::kInput, "lp_tol must lie in (0, 1e-4]");
    }
    const auto [lo, hi] = ScaleRange();
    if (!(lo > 0.0) || !(hi > lo)) {
      throw Error(ErrorKind::kInput,
                  "alphabet_scale_range must be a positive interval");
    }
    if (static_cast<long long>(b_in) * b_out > kMaxDesignVariables) {
      throw Error(ErrorKind::kSize, "b_in * b_out exceeds 4096");
    }
  }
};

inline Vector AffineAlphabet(int b_out, double scale) {
  Vector a(b_out);
  for (int j = 0; j < b_out; ++j) {
    a[j] = 0.5 + scale * (2.0 * j / static_cast<double>(b_out - 1) - 1.0);
  }
  return a;
}

struct ScaleEvaluation {
  double scale = 0.0;
  bool feasible = false;
  double total_variance = std::numeric_limits<double>::infinity();
  double infeasibility = 0.0;
  int worst_row = -1;
  Matrix probs;  // raw LP solution, row-major b_in x b_out
};

// Solves the fixed-alphabet MVU linear program. Only adjacent grid rows are
// constrained; for the L1 metric on a line this implies the constraint for
// every pair by chaining.
inline ScaleEvaluation SolveForAlphabet(int b_in, const Vector& alphabet,
                                        double eps) {
  const int b_out = static_cast<int>(alphabet.size());
  const Vector grid = internal::UniformGrid(b_in);
  const std::size_t n = static_cast<std::size_t>(b_in) * b_out;
  auto var = [b_out](int i, int j) {
    return static_cast<std::size_t>(i) * b_out + j;
  };

  lp::Problem prob;
  prob.cost.assign(n, 0.0);
  for (int i = 0; i < b_in; ++i) {
    for (int j = 0; j < b_out; ++j) prob.cost[var(i, j)] = alphabet[j] * alphabet[j];
  }
  for (int i = 0; i < b_in; ++i) {
    std::vector<double> simplex(n, 0.0), mean(n, 0.0);
    for (int j = 0; j < b_out; ++j) {
      simplex[var(i, j)] = 1.0;
      mean[var(i, j)] = alphabet[j];
    }
    prob.a_eq.push_back(std::move(simplex));
    prob.b_eq.push_back(1.0);
    prob.a_eq.push_back(std::move(mean));
    prob.b_eq.push_back(grid[i]);
  }
  // Ratios beyond e^kMaxLogRatio make the tableau numerically meaningless.
  // Capping tightens the constraint, so solutions stay feasible for the true
  // bound; the optimum moves by at most ~e^-kMaxLogRatio.
  const double ratio =
      std::exp(std::min(eps * (grid[1] - grid[0]), kMaxLogRatio));
  for (int i = 0; i + 1 < b_in; ++i) {
    for (int j = 0; j < b_out; ++j) {
      std::vector<double> up(n, 0.0), down(n, 0.0);
      up[var(i, j)] = 1.0;
      up[var(i + 1, j)] = -ratio;
      down[var(i + 1, j)] = 1.0;
      down[var(i, j)] = -ratio;
      prob.a_le.push_back(std::move(up));
      prob.b_le.push_back(0.0);
      prob.a_le.push_back(std::move(down));
      prob.b_le.push_back(0.0);
    }
  }

  const lp::Result res = lp::Solve(prob);
  ScaleEvaluation ev;
  ev.infeasibility = res.infeasibility;
  ev.worst_row = res.worst_row;
  if (res.status != lp::Status::kOptimal) return ev;
  ev.feasible = true;
  ev.probs.assign(b_in, Vector(b_out));
  double total = 0.0;
  for (int i = 0; i < b_in; ++i) {
    for (int j = 0; j < b_out; ++j) ev.probs[i][j] = res.x[var(i, j)];
    total -= grid[i] * grid[i];
  }
  ev.total_variance = total + res.objective;
  return ev;
}

namespace internal {

// Repairs an LP solution into a strictly positive table that satisfies the
// metric-DP ratios in the log domain: raise every entry to the log-Lipschitz
// envelope of its column, apply the probability floor, renormalize rows.
// Raising the smaller side of a ratio never breaks a ratio bound, so every
// step preserves the constraints up to rounding.
inline Matrix RepairProbabilities(const Matrix& probs, const Vector& grid,
                                  double eps) {
  const std::size_t b_in = probs.size();
  const std::size_t b_out = probs.front().size();
  Matrix out = probs;
  for (std::size_t j = 0; j < b_out; ++j) {
    for (std::size_t i = 0; i < b_in; ++i) {
      double env = std::max(probs[i][j], 0.0);
      for (std::size_t k = 0; k < b_in; ++k) {
        const double lifted = std::max(probs[k][j], 0.0) *
                              std::exp(-eps * std::abs(grid[i] - grid[k]));
        env = std::max(env, lifted);
      }
      out[i][j] = std::max(env, kProbabilityFloor);
    }
  }
  for (auto& row : out) {
    double s = 0.0;
    for (double v : row) s += v;
    for (double& v : row) v /= s;
  }
  return out;
}

inline Matrix LogOf(const Matrix& m) {
  Matrix out = m;
  for (auto& row : out) {
    for (double& v : row) v = std::log(v);
  }
  return out;
}

}  // namespace internal

// Averages each row with the doubly reversed row of the mirrored grid point,
// p'_{i,j} = (p_{i,j} + p_{B_in-i+1, B_out-j+1}) / 2, and renormalizes.
inline Matrix AnadromicAverage(const Matrix& probs) {
  const std::size_t b_in = probs.size();
  const std::size_t b_out = probs.front().size();
  Matrix out(b_in, Vector(b_out));
  for (std::size_t i = 0; i < b_in; ++i) {
    for (std::size_t j = 0; j < b_out; ++j) {
      out[i][j] =
          0.5 * (probs[i][j] + probs[b_in - 1 - i][b_out - 1 - j]);
    }
  }
  for (auto& row : out) {
    double s = 0.0;
    for (double v : row) s += v;
    for (double& v : row) v /= s;
  }
  return out;
}

// Symmetrizes a table so that row i and row B_in-i+1 are reverses of each
// other. The design constraints are invariant under the joint reversal only
// when the alphabet is symmetric about 1/2, so the result is re-checked
// rather than assumed valid.
inline MechanismTable EnforceAnadromic(const MechanismTable& table,
                                       double lp_tol = 1e-6) {
  RawTable raw = table.ToRaw();
  raw.probs = AnadromicAverage(raw.probs);
  const ValidationReport report = ValidateTable(raw, lp_tol);
  if (!report.passed()) {
    throw Error(ErrorKind::kSymmetry,
                "symmetrized table violates design constraints: " +
                    report.FirstFailure());
  }
  try {
    return MechanismTable::Create(raw.grid, raw.alphabet,
                                  internal::LogOf(raw.probs), raw.design_eps);
  } catch (const Error& e) {
    throw Error(ErrorKind::kSymmetry,
                std::string("symmetrized table rejected: ") + e.what());
  }
}

struct DesignResult {
  MechanismTable table;
  double scale;
  double total_variance;
  int lp_solves;
};

// Full design with diagnostics.
inline DesignResult DesignMvuDetailed(const DesignSpec& spec) {
  spec.Validate();
  const auto [lo, hi] = spec.ScaleRange();

  int solves = 0;
  ScaleEvaluation best;
  ScaleEvaluation closest_infeasible;
  closest_infeasible.infeasibility = std::numeric_limits<double>::infinity();
  auto evaluate = [&](double s) {
    ScaleEvaluation ev =
        SolveForAlphabet(spec.b_in, AffineAlphabet(spec.b_out, s), spec.eps);
    ev.scale = s;
    ++solves;
    if (ev.feasible && ev.total_variance < best.total_variance) best = ev;
    if (!ev.feasible && ev.infeasibility < closest_infeasible.infeasibility) {
      closest_infeasible = ev;
    }
    return ev.feasible ? ev.total_variance
                       : std::numeric_limits<double>::infinity();
  };

  // Coarse scan to bracket the best feasible scale.
  std::vector<double> scan(kScaleScanPoints);
  std::vector<double> values(kScaleScanPoints);
  for (int k = 0; k < kScaleScanPoints; ++k) {
    scan[k] = lo + (hi - lo) * k / static_cast<double>(kScaleScanPoints - 1);
    values[k] = evaluate(scan[k]);
  }
  int kbest = -1;
  for (int k = 0; k < kScaleScanPoints; ++k) {
    if (std::isfinite(values[k]) && (kbest < 0 || values[k] < values[kbest])) {
      kbest = k;
    }
  }
  if (kbest < 0) {
    std::ostringstream os;
    os << "LP infeasible at every alphabet scale in [" << lo << ", " << hi
       << "]; tightest phase-1 infeasibility " << closest_infeasible.infeasibility
       << " at scale " << closest_infeasible.scale;
    if (closest_infeasible.worst_row >= 0) {
      const int row = closest_infeasible.worst_row;
      os << " (" << (row % 2 == 0 ? "simplex" : "unbiasedness")
         << " constraint of grid row " << row / 2 << ")";
    }
    throw Error(ErrorKind::kDesign, os.str());
  }

  // Golden-section refinement; infeasible points compare as +inf, and ties
  // move the bracket right because infeasibility lives at small scales.
  double a = scan[std::max(kbest - 1, 0)];
  double b = scan[std::min(kbest + 1, kScaleScanPoints - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = evaluate(c);
  double fd = evaluate(d);
  for (int it = 2; it < kGoldenIterations; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = evaluate(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = evaluate(d);
    }
  }

  const Vector alphabet = AffineAlphabet(spec.b_out, best.scale);
  const Vector grid = internal::UniformGrid(spec.b_in);
  Matrix probs = internal::RepairProbabilities(best.probs, grid, spec.eps);

  RawTable raw{grid, alphabet, probs, spec.eps};
  const ValidationReport report = ValidateTable(raw, spec.lp_tol);
  if (!report.passed()) {
    throw Error(ErrorKind::kDesign,
                "designed table fails re-verification: " +
                    report.FirstFailure());
  }
  MechanismTable table = MechanismTable::Create(
      grid, alphabet, internal::LogOf(probs), spec.eps);
  if (spec.symmetrize) table = EnforceAnadromic(table, spec.lp_tol);
  return DesignResult{std::move(table), best.scale, best.total_variance,
                      solves};
}

inline MechanismTable DesignMvu(const DesignSpec& spec) {
  return DesignMvuDetailed(spec).table;
}

inline ValidationReport ValidateTable(const MechanismTable& table, double tol) {
  return ValidateTable(table.ToRaw(), tol);
}

// Total variance sum_i Var(M(x_i)) of a table at its grid points.
inline double TotalGridVariance(const MechanismTable& table) {
  double total = 0.0;
  for (int i = 0; i < table.b_in(); ++i) {
    total += MomentsOf(table.alphabet(), table.probs(i)).variance;
  }
  return total;
}

}  // namespace imvu
