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
// Privacy accounting for the interpolated mechanism.
//
// Pure DP (L1-bounded inputs): the max divergence between outputs at x and
// x' is at most (eps + eps') |x - x'|, where eps is the table's metric-DP
// parameter and eps' bounds the slope of the log-partition function along
// each interpolation segment.
//
// Renyi DP (L2-bounded inputs, two-row tables): D_alpha is at most
// alpha M (x - x')^2 / 2 with M the supremum over the real line of the
// Fisher information of the interpolated family.
//
// Both constants are certified upper bounds: grid evaluations plus a
// Lipschitz padding that covers the gaps between grid points.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "imvu/error.hpp"
#include "imvu/mechanism.hpp"

namespace imvu {

inline constexpr double kDefaultDelta = 1e-5;
inline constexpr int kDefaultPointsPerInterval = 10000;

inline std::vector<double> DefaultAlphas() {
  return {1.25, 1.5, 2, 2.5, 3, 4, 5, 6, 8, 16, 32, 64};
}

// Accounting domain of the beta-scaled mechanism, [(1-beta)/2, (1+beta)/2],
// widened to contain [0, 1].
inline std::pair<double, double> AccountingDomain(double beta) {
  return {std::min(0.0, (1.0 - beta) / 2.0), std::max(1.0, (1.0 + beta) / 2.0)};
}

// ---------------------------------------------------------------------------
// Pure DP constant.

struct EpsPrimeResult {
  double value = 0.0;     // certified eps' (includes padding)
  double grid_max = 0.0;  // (B_in - 1) * max of h over grid points, unpadded
  double pad = 0.0;       // (B_in - 1) * largest Lipschitz padding applied
  long long grid_points = 0;
};

// Certified bound on (B_in - 1) * sup |sigma(eta(xi))' (eta_{i+1} - eta_i)|
// over every interpolation segment that intersects `domain`, including the
// extrapolated boundary segments.
inline EpsPrimeResult EpsPrime(const MechanismTable& table,
                               std::pair<double, double> domain,
                               int points_per_interval =
                                   kDefaultPointsPerInterval) {
  const auto [lo, hi] = domain;
  if (!(lo <= 0.0 && hi >= 1.0) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::kInput, "accounting domain must contain [0, 1]");
  }
  if (points_per_interval < 2) {
    throw Error(ErrorKind::kInput, "points_per_interval must be at least 2");
  }
  const auto& eta = table.log_probs();
  for (const auto& row : eta) {
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kInput, "natural parameters must be finite");
      }
    }
  }
  const int segments = table.b_in() - 1;
  const double scale = static_cast<double>(segments);
  const double spacing = table.spacing();
  const std::size_t b_out = static_cast<std::size_t>(table.b_out());

  EpsPrimeResult out;
  double best = 0.0;
  double best_grid = 0.0;
  double worst_pad = 0.0;
  Vector point(b_out);
  for (int i = 0; i < segments; ++i) {
    double seg_lo = table.grid()[i];
    double seg_hi = table.grid()[i + 1];
    if (i == 0) seg_lo = lo;
    if (i == segments - 1) seg_hi = hi;

    Vector theta(b_out);
    double tmax = -std::numeric_limits<double>::infinity();
    double tmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b_out; ++j) {
      theta[j] = eta[i + 1][j] - eta[i][j];
      tmax = std::max(tmax, theta[j]);
      tmin = std::min(tmin, theta[j]);
    }
    // |dh/dxi| <= (B_in - 1) Var_sigma(theta) <= (B_in - 1) range^2 / 4.
    const double lipschitz = scale * (tmax - tmin) * (tmax - tmin) / 4.0;

    const long long n = std::max<long long>(
        2, static_cast<long long>(std::ceil((seg_hi - seg_lo) / spacing *
                                            points_per_interval)));
    const double step = (seg_hi - seg_lo) / static_cast<double>(n - 1);
    double seg_max = 0.0;
    for (long long k = 0; k < n; ++k) {
      const double xi = k + 1 == n ? seg_hi : seg_lo + step * k;
      const double w_hi = (xi - table.grid()[i]) / spacing;
      const double w_lo = (table.grid()[i + 1] - xi) / spacing;
      for (std::size_t j = 0; j < b_out; ++j) {
        point[j] = w_lo * eta[i][j] + w_hi * eta[i + 1][j];
      }
      const Vector sigma = internal::Softmax(point);
      double dot = 0.0;
      for (std::size_t j = 0; j < b_out; ++j) dot += sigma[j] * theta[j];
      seg_max = std::max(seg_max, std::abs(dot));
    }
    const double pad = lipschitz * step / 2.0;
    out.grid_points += n;
    best_grid = std::max(best_grid, seg_max);
    worst_pad = std::max(worst_pad, pad);
    best = std::max(best, seg_max + pad);
  }
  out.value = scale * best;
  out.grid_max = scale * best_grid;
  out.pad = scale * worst_pad;
  return out;
}

// Per-round pure-DP cost (eps + eps') * C for inputs whose scaled L1
// distance is at most C.
inline double L1RoundEps(const InterpolatedMechanism& mech, double c1_sens) {
  if (!mech.eps_prime()) {
    throw Error(ErrorKind::kState,
                "eps_prime has not been computed for this mechanism");
  }
  if (!(c1_sens >= 0.0) || !std::isfinite(c1_sens)) {
    throw Error(ErrorKind::kInput, "sensitivity must be non-negative");
  }
  return (mech.table().design_eps() + *mech.eps_prime()) * c1_sens;
}

// ---------------------------------------------------------------------------
// Fisher information for two-row tables.

// I(x) = theta' (diag(s) - s s') theta with s = softmax((1-x) eta1 + x eta2)
// and theta = eta2 - eta1, evaluated as the variance of theta under s.
inline double FisherInfo(std::span<const double> eta1,
                         std::span<const double> eta2, double x) {
  const std::size_t b = eta1.size();
  Vector point(b);
  for (std::size_t j = 0; j < b; ++j) {
    point[j] = (1.0 - x) * eta1[j] + x * eta2[j];
  }
  const Vector sigma = internal::Softmax(point);
  double mean = 0.0;
  for (std::size_t j = 0; j < b; ++j) mean += sigma[j] * (eta2[j] - eta1[j]);
  double var = 0.0;
  for (std::size_t j = 0; j < b; ++j) {
    const double d = (eta2[j] - eta1[j]) - mean;
    var += sigma[j] * d * d;
  }
  return var;
}

struct FisherSupResult {
  double m = 0.0;       // certified sup_x I(x)
  double i_star = 0.0;  // I(1/2)
  double threshold = 0.5;  // s: I(x) <= I* once sigma_{j+}(x) >= s
  double x_min = 0.5;
  double x_max = 0.5;
  int j_plus = -1;
  long long evaluations = 0;
  double pad = 0.0;  // largest Lipschitz padding among retained intervals
};

struct FisherSupOptions {
  double anadromic_tol = 1e-9;
  double uniqueness_margin = 1e-12;
  double bisection_tol = 1e-12;
  int initial_points = 4097;
  // Refinement stops once every interval's upper bound is within this
  // relative gap of the best evaluated value.
  double relative_gap = 1e-8;
  int max_depth = 48;
};

// Supremum of the Fisher information over the whole real line for an
// anadromic pair. The search is confined to [1 - x_max, x_max], beyond
// which the tail bound 4 theta_{j+}^2 s (1 - s) <= I(1/2) applies. Inside,
// a Lipschitz branch-and-bound with |I'| <= 6 |theta|_inf^3 certifies the
// maximum.
inline FisherSupResult FisherSup(std::span<const double> eta1,
                                 std::span<const double> eta2,
                                 const FisherSupOptions& opt = {}) {
  const std::size_t b = eta1.size();
  if (b != eta2.size() || b < 2) {
    throw Error(ErrorKind::kInput, "natural parameter vectors must match");
  }
  for (std::size_t j = 0; j < b; ++j) {
    if (!std::isfinite(eta1[j]) || !std::isfinite(eta2[j])) {
      throw Error(ErrorKind::kInput, "natural parameters must be finite");
    }
    if (std::abs(eta1[j] - eta2[b - 1 - j]) > opt.anadromic_tol) {
      throw Error(ErrorKind::kSymmetry,
                  "natural parameters are not anadromic at output " +
                      std::to_string(j) +
                      "; symmetrize the table with EnforceAnadromic first");
    }
  }

  Vector theta(b);
  double theta_inf = 0.0;
  for (std::size_t j = 0; j < b; ++j) {
    theta[j] = eta2[j] - eta1[j];
    theta_inf = std::max(theta_inf, std::abs(theta[j]));
  }
  FisherSupResult out;
  if (theta_inf == 0.0) return out;

  std::size_t j_plus = 0;
  std::size_t j_minus = 0;
  for (std::size_t j = 1; j < b; ++j) {
    if (theta[j] > theta[j_plus]) j_plus = j;
    if (theta[j] < theta[j_minus]) j_minus = j;
  }
  for (std::size_t j = 0; j < b; ++j) {
    if ((j != j_plus && theta[j_plus] - theta[j] <= opt.uniqueness_margin) ||
        (j != j_minus && theta[j] - theta[j_minus] <= opt.uniqueness_margin)) {
      throw Error(ErrorKind::kUniqueness,
                  "argmax/argmin of eta2 - eta1 is not unique (output " +
                      std::to_string(j) + ")");
    }
  }
  out.j_plus = static_cast<int>(j_plus);

  auto fisher = [&](double x) {
    ++out.evaluations;
    return FisherInfo(eta1, eta2, x);
  };
  auto sigma_plus = [&](double x) {
    Vector point(b);
    for (std::size_t j = 0; j < b; ++j) {
      point[j] = (1.0 - x) * eta1[j] + x * eta2[j];
    }
    return internal::Softmax(point)[j_plus];
  };

  out.i_star = fisher(0.5);
  const double tp2 = theta[j_plus] * theta[j_plus];
  out.threshold =
      0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - out.i_star / tp2)));

  // sigma_{j+} is nondecreasing in x: d/dx log sigma_{j+} = theta_{j+} -
  // E[theta] >= 0. Bracket, then bisect to the first x past the threshold.
  double lo = 0.5;
  double hi = 0.5;
  if (sigma_plus(0.5) < out.threshold) {
    double width = 1.0;
    hi = 0.5 + width;
    while (sigma_plus(hi) < out.threshold) {
      lo = hi;
      width *= 2.0;
      hi = 0.5 + width;
      if (width > 1e12) {
        throw Error(ErrorKind::kInput,
                    "tail threshold not reached; theta too small");
      }
    }
    while (hi - lo > opt.bisection_tol) {
      const double mid = 0.5 * (lo + hi);
      if (sigma_plus(mid) >= out.threshold) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  out.x_max = hi;
  out.x_min = 1.0 - hi;

  // Lipschitz branch-and-bound on [x_min, x_max].
  const double lipschitz = 6.0 * theta_inf * theta_inf * theta_inf;
  struct Interval {
    double a, b, fa, fb;
  };
  std::vector<Interval> work;
  double best = out.i_star;
  if (out.x_max > out.x_min) {
    const int n = std::max(opt.initial_points, 2);
    const double step = (out.x_max - out.x_min) / (n - 1);
    double prev_x = out.x_min;
    double prev_f = fisher(prev_x);
    best = std::max(best, prev_f);
    for (int k = 1; k < n; ++k) {
      const double x = k + 1 == n ? out.x_max : out.x_min + step * k;
      const double f = fisher(x);
      best = std::max(best, f);
      work.push_back({prev_x, x, prev_f, f});
      prev_x = x;
      prev_f = f;
    }
  }
  auto upper = [&](const Interval& iv) {
    return 0.5 * (iv.fa + iv.fb) + lipschitz * (iv.b - iv.a) / 2.0;
  };
  double certified = best;
  double worst_pad = 0.0;
  for (int depth = 0; depth <= opt.max_depth && !work.empty(); ++depth) {
    const double target = best * (1.0 + opt.relative_gap);
    std::vector<Interval> next;
    for (const Interval& iv : work) {
      const double ub = upper(iv);
      if (ub <= target) {
        certified = std::max(certified, ub);
        worst_pad = std::max(worst_pad, lipschitz * (iv.b - iv.a) / 2.0);
        continue;
      }
      if (depth == opt.max_depth) {
        certified = std::max(certified, ub);
        worst_pad = std::max(worst_pad, lipschitz * (iv.b - iv.a) / 2.0);
        continue;
      }
      const double mid = 0.5 * (iv.a + iv.b);
      const double fm = fisher(mid);
      best = std::max(best, fm);
      next.push_back({iv.a, mid, iv.fa, fm});
      next.push_back({mid, iv.b, fm, iv.fb});
    }
    work = std::move(next);
  }
  out.m = std::max(certified, best);
  out.pad = worst_pad;
  return out;
}

inline FisherSupResult FisherSup(const MechanismTable& table,
                                 const FisherSupOptions& opt = {}) {
  if (table.b_in() != 2) {
    throw Error(ErrorKind::kState,
                "Fisher-information accounting requires b_in = 2");
  }
  return FisherSup(table.log_probs()[0], table.log_probs()[1], opt);
}

// Per-round RDP curve alpha * M * C^2 / 2.
inline std::vector<double> L2RoundRdp(double fisher_m, double c2_sens,
                                      std::span<const double> alphas) {
  if (!(fisher_m >= 0.0) || !std::isfinite(fisher_m)) {
    throw Error(ErrorKind::kInput, "M must be non-negative");
  }
  if (!(c2_sens >= 0.0) || !std::isfinite(c2_sens)) {
    throw Error(ErrorKind::kInput, "sensitivity must be non-negative");
  }
  std::vector<double> out;
  out.reserve(alphas.size());
  for (double a : alphas) {
    if (!(a > 1.0)) {
      throw Error(ErrorKind::kInput, "RDP orders must exceed 1");
    }
    out.push_back(a * fisher_m * c2_sens * c2_sens / 2.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Composition and conversion.

enum class AccountingMode { kPure, kRdp };

inline std::string ModeName(AccountingMode m) {
  return m == AccountingMode::kPure ? "pure" : "rdp";
}

inline AccountingMode ParseMode(std::string_view name) {
  if (name == "pure") return AccountingMode::kPure;
  if (name == "rdp") return AccountingMode::kRdp;
  throw Error(ErrorKind::kInput, "unknown accounting mode '" +
                                     std::string(name) + "'");
}

struct DpConversion {
  double eps;
  double alpha;
};

// Smallest (eps, delta)-DP guarantee implied by an RDP curve, using
//   eps = eps_a + log((a - 1) / a) - (log delta + log a) / (a - 1).
inline DpConversion RdpToDp(std::span<const double> eps_alphas,
                            std::span<const double> alphas, double delta) {
  if (alphas.empty() || eps_alphas.size() != alphas.size()) {
    throw Error(ErrorKind::kInput, "RDP curve must be non-empty and aligned");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorKind::kInput, "delta must lie in (0, 1)");
  }
  DpConversion best{std::numeric_limits<double>::infinity(), alphas[0]};
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const double a = alphas[k];
    if (!(a > 1.0)) throw Error(ErrorKind::kInput, "RDP orders must exceed 1");
    const double eps = eps_alphas[k] + std::log((a - 1.0) / a) -
                       (std::log(delta) + std::log(a)) / (a - 1.0);
    if (eps < best.eps) best = DpConversion{eps, a};
  }
  return best;
}

// Per-round privacy costs with additive composition.
class PrivacyLedger {
 public:
  static PrivacyLedger Pure(double delta = kDefaultDelta) {
    return PrivacyLedger(AccountingMode::kPure, {}, delta);
  }
  static PrivacyLedger Rdp(std::vector<double> alphas = DefaultAlphas(),
                           double delta = kDefaultDelta) {
    if (alphas.empty()) {
      throw Error(ErrorKind::kInput, "RDP ledger needs at least one order");
    }
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      if (!(alphas[k] > 1.0) || (k > 0 && !(alphas[k] > alphas[k - 1]))) {
        throw Error(ErrorKind::kInput,
                    "RDP orders must be ascending and exceed 1");
      }
    }
    return PrivacyLedger(AccountingMode::kRdp, std::move(alphas), delta);
  }

  AccountingMode mode() const { return mode_; }
  const std::vector<double>& alphas() const { return alphas_; }
  double delta() const { return delta_; }
  std::size_t rounds() const { return rounds_.size(); }
  const std::vector<std::vector<double>>& per_round() const { return rounds_; }

  void AddPureRound(double eps) {
    if (mode_ != AccountingMode::kPure) {
      throw Error(ErrorKind::kState, "ledger is not in pure mode");
    }
    if (!(eps >= 0.0)) throw Error(ErrorKind::kInput, "cost must be >= 0");
    rounds_.push_back({eps});
  }

  void AddRdpRound(std::vector<double> eps_alphas) {
    if (mode_ != AccountingMode::kRdp) {
      throw Error(ErrorKind::kState, "ledger is not in rdp mode");
    }
    if (eps_alphas.size() != alphas_.size()) {
      throw Error(ErrorKind::kInput, "RDP cost does not match the order grid");
    }
    for (double v : eps_alphas) {
      if (!(v >= 0.0)) throw Error(ErrorKind::kInput, "cost must be >= 0");
    }
    rounds_.push_back(std::move(eps_alphas));
  }

  // Sum over rounds: a single-entry vector in pure mode, one entry per
  // order in rdp mode.
  std::vector<double> Compose() const {
    std::vector<double> total(mode_ == AccountingMode::kPure ? 1 : alphas_.size(),
                              0.0);
    for (const auto& r : rounds_) {
      for (std::size_t k = 0; k < total.size(); ++k) total[k] += r[k];
    }
    return total;
  }

  // Spent (eps, delta) budget. Pure mode reports the composed eps (delta is
  // not consumed); rdp mode converts at the ledger's delta.
  DpConversion SpentEps() const {
    const std::vector<double> total = Compose();
    if (mode_ == AccountingMode::kPure) {
      return DpConversion{total[0], std::numeric_limits<double>::infinity()};
    }
    return RdpToDp(total, alphas_, delta_);
  }

 private:
  PrivacyLedger(AccountingMode mode, std::vector<double> alphas, double delta)
      : mode_(mode), alphas_(std::move(alphas)), delta_(delta) {
    if (!(delta_ > 0.0 && delta_ < 1.0)) {
      throw Error(ErrorKind::kInput, "delta must lie in (0, 1)");
    }
  }

  AccountingMode mode_;
  std::vector<double> alphas_;
  double delta_;
  std::vector<std::vector<double>> rounds_;
};

// Per-round costs of the uncompressed baselines.
//   gaussian: noise std sigma * C at sensitivity C -> eps_alpha = alpha / (2 sigma^2)
//   laplace:  scale C1 / eps at sensitivity C1     -> pure eps
inline std::vector<double> GaussianRdp(double noise_multiplier,
                                       std::span<const double> alphas) {
  if (!(noise_multiplier > 0.0)) {
    throw Error(ErrorKind::kInput, "noise multiplier must be positive");
  }
  std::vector<double> out;
  for (double a : alphas) {
    if (!(a > 1.0)) throw Error(ErrorKind::kInput, "RDP orders must exceed 1");
    out.push_back(a / (2.0 * noise_multiplier * noise_multiplier));
  }
  return out;
}

inline double LaplacePure(double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::kInput, "eps must be positive");
  return eps;
}

}  // namespace imvu
