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
// Exact reference computations over the finite output space. Everything here
// is evaluated in long double with log-domain accumulation and re-derives
// the interpolated distribution from the table itself, so it shares no code
// path with the mechanism or the accountant.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "imvu/error.hpp"
#include "imvu/mechanism.hpp"

namespace imvu::oracle {

using Real = long double;
using RealVector = std::vector<Real>;

inline constexpr double kInfiniteOrder = std::numeric_limits<double>::infinity();

namespace internal {

inline Real LogSumExp(std::span<const Real> v) {
  Real m = -std::numeric_limits<Real>::infinity();
  for (Real x : v) m = std::max(m, x);
  Real s = 0;
  for (Real x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline void CheckDistribution(std::span<const double> p) {
  long double sum = 0;
  for (double v : p) {
    if (!(v > 0.0)) {
      throw Error(ErrorKind::kInput,
                  "oracle distributions must be strictly positive");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0L) > 1e-12L) {
    throw Error(ErrorKind::kInput, "oracle distributions must sum to 1");
  }
}

}  // namespace internal

// log P(j | eta(x)) recomputed from the table rows in extended precision.
// Outside [0, 1] the first/last segment's affine rule is extended.
inline RealVector ExactLogPmf(const MechanismTable& table, Real x) {
  const int b_in = table.b_in();
  const int b_out = table.b_out();
  const Real segments = static_cast<Real>(b_in - 1);
  Real pos = x * segments;
  int i = static_cast<int>(std::floor(pos));
  i = std::clamp(i, 0, b_in - 2);
  const Real t = pos - static_cast<Real>(i);
  RealVector eta(b_out);
  for (int j = 0; j < b_out; ++j) {
    eta[j] = (1 - t) * static_cast<Real>(table.log_probs()[i][j]) +
             t * static_cast<Real>(table.log_probs()[i + 1][j]);
  }
  const Real a = internal::LogSumExp(eta);
  for (Real& v : eta) v -= a;
  return eta;
}

inline Vector ExactPmf(const MechanismTable& table, Real x) {
  const RealVector lp = ExactLogPmf(table, x);
  Vector out(lp.size());
  for (std::size_t j = 0; j < lp.size(); ++j) {
    out[j] = static_cast<double>(std::exp(lp[j]));
  }
  return out;
}

// D_inf between finite distributions given by their logs.
inline Real MaxDivergenceLog(std::span<const Real> lp, std::span<const Real> lq) {
  Real worst = 0;
  for (std::size_t j = 0; j < lp.size(); ++j) {
    worst = std::max(worst, std::abs(lp[j] - lq[j]));
  }
  return worst;
}

// D_alpha(p || q) = log(sum_j p_j^alpha q_j^(1-alpha)) / (alpha - 1).
inline Real RenyiLog(std::span<const Real> lp, std::span<const Real> lq,
                     Real alpha) {
  RealVector terms(lp.size());
  for (std::size_t j = 0; j < lp.size(); ++j) {
    terms[j] = alpha * lp[j] + (1 - alpha) * lq[j];
  }
  return std::max<Real>(0, internal::LogSumExp(terms) / (alpha - 1));
}

inline double ExactMaxDivergence(std::span<const double> p,
                                 std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorKind::kInput, "distributions differ in length");
  }
  internal::CheckDistribution(p);
  internal::CheckDistribution(q);
  Real worst = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    worst = std::max(worst, std::abs(std::log(static_cast<Real>(p[j])) -
                                     std::log(static_cast<Real>(q[j]))));
  }
  return static_cast<double>(worst);
}

inline double ExactRenyi(std::span<const double> p, std::span<const double> q,
                         double alpha) {
  if (!(alpha > 1.0)) {
    throw Error(ErrorKind::kInput, "Renyi order must exceed 1");
  }
  if (p.size() != q.size()) {
    throw Error(ErrorKind::kInput, "distributions differ in length");
  }
  internal::CheckDistribution(p);
  internal::CheckDistribution(q);
  if (std::isinf(alpha)) return ExactMaxDivergence(p, q);
  RealVector lp(p.size()), lq(q.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    lp[j] = std::log(static_cast<Real>(p[j]));
    lq[j] = std::log(static_cast<Real>(q[j]));
  }
  return static_cast<double>(RenyiLog(lp, lq, alpha));
}

// Divergence between the mechanism's output distributions at x and x'.
// alpha = kInfiniteOrder selects the max divergence.
inline double MechanismDivergence(const MechanismTable& table, double x,
                                  double x_prime, double alpha) {
  const RealVector lp = ExactLogPmf(table, x);
  const RealVector lq = ExactLogPmf(table, x_prime);
  if (std::isinf(alpha)) return static_cast<double>(MaxDivergenceLog(lp, lq));
  if (!(alpha > 1.0)) {
    throw Error(ErrorKind::kInput, "Renyi order must exceed 1");
  }
  return static_cast<double>(RenyiLog(lp, lq, alpha));
}

inline constexpr int kMaxJointDims = 3;
inline constexpr long long kMaxJointOutcomes = 4096;

// Divergence of the product distribution over every joint outcome of a
// coordinate-wise mechanism, by direct enumeration.
inline double JointDivergenceBruteforce(const MechanismTable& table,
                                        std::span<const double> x,
                                        std::span<const double> x_prime,
                                        double alpha) {
  const std::size_t d = x.size();
  if (d == 0 || d != x_prime.size()) {
    throw Error(ErrorKind::kInput, "input vectors must be non-empty and aligned");
  }
  long long outcomes = 1;
  for (std::size_t k = 0; k < d; ++k) outcomes *= table.b_out();
  if (static_cast<int>(d) > kMaxJointDims || outcomes > kMaxJointOutcomes) {
    throw Error(ErrorKind::kSize, "joint outcome space too large to enumerate");
  }
  if (!(alpha > 1.0)) {
    throw Error(ErrorKind::kInput, "Renyi order must exceed 1");
  }
  std::vector<RealVector> lp(d), lq(d);
  for (std::size_t k = 0; k < d; ++k) {
    lp[k] = ExactLogPmf(table, x[k]);
    lq[k] = ExactLogPmf(table, x_prime[k]);
  }
  const std::size_t b = static_cast<std::size_t>(table.b_out());
  RealVector joint_p(outcomes), joint_q(outcomes);
  for (long long o = 0; o < outcomes; ++o) {
    long long rest = o;
    Real sp = 0, sq = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t j = static_cast<std::size_t>(rest % b);
      rest /= static_cast<long long>(b);
      sp += lp[k][j];
      sq += lq[k][j];
    }
    joint_p[o] = sp;
    joint_q[o] = sq;
  }
  if (std::isinf(alpha)) {
    return static_cast<double>(MaxDivergenceLog(joint_p, joint_q));
  }
  return static_cast<double>(RenyiLog(joint_p, joint_q, alpha));
}

// Fisher information sum_j theta_j^2 s_j - (sum_j theta_j s_j)^2 in extended
// precision.
inline Real FisherInfo(std::span<const double> eta1,
                       std::span<const double> eta2, Real x) {
  const std::size_t b = eta1.size();
  RealVector point(b);
  for (std::size_t j = 0; j < b; ++j) {
    point[j] = (1 - x) * static_cast<Real>(eta1[j]) +
               x * static_cast<Real>(eta2[j]);
  }
  const Real a = internal::LogSumExp(point);
  Real m1 = 0, m2 = 0;
  for (std::size_t j = 0; j < b; ++j) {
    const Real s = std::exp(point[j] - a);
    const Real th = static_cast<Real>(eta2[j]) - static_cast<Real>(eta1[j]);
    m1 += th * s;
    m2 += th * th * s;
  }
  return std::max<Real>(0, m2 - m1 * m1);
}

// Maximum of the Fisher information over n uniform points of [lo, hi].
inline double FisherGridMax(std::span<const double> eta1,
                            std::span<const double> eta2, double lo, double hi,
                            long long n) {
  if (n < 10000) {
    throw Error(ErrorKind::kInput, "grid oracle needs at least 1e4 points");
  }
  Real best = 0;
  const Real step = (static_cast<Real>(hi) - lo) / static_cast<Real>(n - 1);
  for (long long k = 0; k < n; ++k) {
    best = std::max(best, FisherInfo(eta1, eta2, lo + step * k));
  }
  return static_cast<double>(best);
}

}  // namespace imvu::oracle
