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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace imvu {

// Unvalidated table contents in the linear probability domain. This is the
// form the designer produces and the validator inspects; it can represent
// broken tables (negative or zero entries) that MechanismTable cannot.
struct RawTable {
  std::vector<double> grid;
  std::vector<double> alphabet;
  std::vector<std::vector<double>> probs;
  double design_eps = 0.0;
};

struct CheckResult {
  std::string name;
  double max_violation = 0.0;
  bool passed = true;
  std::string detail;  // where the worst violation occurred
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.passed; });
  }

  const CheckResult* Find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  std::string FirstFailure() const {
    for (const auto& c : checks) {
      if (!c.passed) {
        std::ostringstream os;
        os << c.name << " check failed (max violation " << c.max_violation
           << (c.detail.empty() ? "" : ", " + c.detail) << ")";
        return os.str();
      }
    }
    return {};
  }
};

namespace internal {

inline CheckResult MakeCheck(std::string name, double violation, double tol,
                             std::string detail) {
  CheckResult c;
  c.name = std::move(name);
  c.max_violation = violation;
  c.passed = violation <= tol;
  if (!c.passed) c.detail = std::move(detail);
  return c;
}

}  // namespace internal

// Runs every table check with its own tolerance. A structurally malformed
// table (mismatched sizes) yields a single failed "shape" check.
inline ValidationReport ValidateRaw(const RawTable& t, double simplex_tol,
                                    double unbiased_tol, double metric_tol,
                                    double grid_tol) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  ValidationReport report;

  const std::size_t b_in = t.grid.size();
  const std::size_t b_out = t.alphabet.size();
  {
    std::string why;
    if (b_in < 2) why = "b_in must be at least 2";
    if (b_out < 2) why = "b_out must be at least 2";
    if (t.probs.size() != b_in) why = "probability rows != b_in";
    for (std::size_t i = 0; why.empty() && i < t.probs.size(); ++i) {
      if (t.probs[i].size() != b_out) {
        why = "row " + std::to_string(i) + " length != b_out";
      }
    }
    if (!(t.design_eps > 0.0) || !std::isfinite(t.design_eps)) {
      why = "design_eps must be positive and finite";
    }
    report.checks.push_back(
        internal::MakeCheck("shape", why.empty() ? 0.0 : kInf, 0.0, why));
    if (!why.empty()) return report;
  }

  {
    double worst = 0.0;
    std::string where;
    for (std::size_t i = 0; i < b_in; ++i) {
      const double expected =
          static_cast<double>(i) / static_cast<double>(b_in - 1);
      const double v = std::isfinite(t.grid[i])
                           ? std::abs(t.grid[i] - expected)
                           : kInf;
      if (v > worst) {
        worst = v;
        where = "grid point " + std::to_string(i);
      }
    }
    report.checks.push_back(
        internal::MakeCheck("grid_uniformity", worst, grid_tol, where));
  }

  {
    double worst = 0.0;
    std::string where;
    for (std::size_t j = 0; j < b_out; ++j) {
      if (!std::isfinite(t.alphabet[j])) {
        worst = kInf;
        where = "alphabet entry " + std::to_string(j) + " not finite";
      } else if (j > 0 && !(t.alphabet[j] > t.alphabet[j - 1])) {
        const double v = t.alphabet[j - 1] - t.alphabet[j];
        if (v >= worst) {
          worst = std::max(v, std::numeric_limits<double>::min());
          where = "alphabet not ascending at " + std::to_string(j);
        }
      }
    }
    report.checks.push_back(
        internal::MakeCheck("alphabet_order", worst, 0.0, where));
  }

  {
    double worst = 0.0;
    std::string where;
    for (std::size_t i = 0; i < b_in; ++i) {
      double sum = 0.0;
      double neg = 0.0;
      for (double p : t.probs[i]) {
        sum += p;
        neg = std::max(neg, -p);
      }
      const double v = std::isfinite(sum) ? std::max(std::abs(sum - 1.0), neg)
                                          : kInf;
      if (v > worst) {
        worst = v;
        where = "row " + std::to_string(i);
      }
    }
    report.checks.push_back(
        internal::MakeCheck("simplex", worst, simplex_tol, where));
  }

  {
    double min_p = kInf;
    std::string where;
    for (std::size_t i = 0; i < b_in; ++i) {
      for (std::size_t j = 0; j < b_out; ++j) {
        if (t.probs[i][j] < min_p || std::isnan(t.probs[i][j])) {
          min_p = std::isnan(t.probs[i][j]) ? -kInf : t.probs[i][j];
          where = "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                  ")";
        }
      }
    }
    CheckResult c;
    c.name = "positivity";
    c.passed = min_p > 0.0;
    c.max_violation = c.passed ? 0.0 : (min_p == 0.0 ? kInf : -min_p);
    if (!c.passed) c.detail = where;
    report.checks.push_back(c);
  }

  {
    double worst = 0.0;
    std::string where;
    for (std::size_t i = 0; i < b_in; ++i) {
      double mean = 0.0;
      for (std::size_t j = 0; j < b_out; ++j) {
        mean += t.alphabet[j] * t.probs[i][j];
      }
      const double v =
          std::isfinite(mean) ? std::abs(mean - t.grid[i]) : kInf;
      if (v > worst) {
        worst = v;
        where = "row " + std::to_string(i);
      }
    }
    report.checks.push_back(
        internal::MakeCheck("unbiasedness", worst, unbiased_tol, where));
  }

  {
    double worst = 0.0;
    std::string where;
    for (std::size_t i = 0; i < b_in; ++i) {
      for (std::size_t k = i + 1; k < b_in; ++k) {
        const double allowed = t.design_eps * std::abs(t.grid[i] - t.grid[k]);
        for (std::size_t j = 0; j < b_out; ++j) {
          const double p = t.probs[i][j];
          const double q = t.probs[k][j];
          double v;
          if (p > 0.0 && q > 0.0) {
            v = std::abs(std::log(p) - std::log(q)) - allowed;
          } else if (p == 0.0 && q == 0.0) {
            v = 0.0;
          } else {
            v = kInf;
          }
          if (v > worst || std::isnan(v)) {
            worst = std::isnan(v) ? kInf : v;
            where = "rows " + std::to_string(i) + "/" + std::to_string(k) +
                    " output " + std::to_string(j);
          }
        }
      }
    }
    report.checks.push_back(
        internal::MakeCheck("metric_dp", worst, metric_tol, where));
  }

  return report;
}

// Single-tolerance validation of all table properties.
inline ValidationReport ValidateTable(const RawTable& t, double tol) {
  return ValidateRaw(t, tol, tol, tol, tol);
}

}  // namespace imvu
