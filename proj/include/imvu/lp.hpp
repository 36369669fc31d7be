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
// Dense two-phase tableau simplex for small linear programs of the form
//
//   minimize    c'x
//   subject to  A_eq x  = b_eq
//               A_le x <= b_le
//               x >= 0
//
// Intended for a few hundred rows and columns. Pivoting uses Dantzig's rule
// and switches to Bland's rule after a run of degenerate pivots so the
// method terminates on degenerate problems. The final basic solution is
// recomputed from the original data by Gaussian elimination with partial
// pivoting to shed accumulated tableau error.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace imvu::lp {

struct Problem {
  std::vector<double> cost;
  std::vector<std::vector<double>> a_eq;
  std::vector<double> b_eq;
  std::vector<std::vector<double>> a_le;
  std::vector<double> b_le;

  std::size_t num_vars() const { return cost.size(); }
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct Result {
  Status status = Status::kInfeasible;
  std::vector<double> x;
  double objective = std::numeric_limits<double>::infinity();
  // Phase-1 optimum (sum of artificials); zero when feasible.
  double infeasibility = 0.0;
  // Index of the equality row carrying the largest artificial at the end of
  // phase 1, or -1.
  int worst_row = -1;
  // max over constraints of the violation of the returned x.
  double max_residual = 0.0;
  int iterations = 0;
};

struct Options {
  double pivot_tol = 1e-11;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-11;
  int max_iterations = 50000;
  int degenerate_switch = 50;
};

namespace internal {

// Solves the dense square system m * x = rhs in place. Returns false if the
// matrix is numerically singular.
inline bool SolveDense(std::vector<std::vector<double>> m,
                       std::vector<double>& rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    }
    if (std::abs(m[piv][col]) < 1e-14) return false;
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m[r][col] / m[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) m[r][k] -= f * m[col][k];
      rhs[r] -= f * rhs[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= m[i][k] * rhs[k];
    rhs[i] = s / m[i][i];
  }
  return true;
}

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), t_(rows + 1, std::vector<double>(cols + 1)),
        basis_(rows) {}

  double& at(std::size_t r, std::size_t c) { return t_[r][c]; }
  double& rhs(std::size_t r) { return t_[r][cols_]; }
  std::vector<double>& objective_row() { return t_[rows_]; }
  std::vector<std::size_t>& basis() { return basis_; }

  void Pivot(std::size_t pr, std::size_t pc) {
    auto& prow = t_[pr];
    const double inv = 1.0 / prow[pc];
    for (double& v : prow) v *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      auto& row = t_[r];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) row[c] -= f * prow[c];
      row[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  // Runs simplex iterations on the current objective row restricted to
  // columns where `allowed[c]` is true. Returns kOptimal, kUnbounded or
  // kIterationLimit.
  Status Run(const std::vector<bool>& allowed, const Options& opt,
             int& iterations) {
    int degenerate_run = 0;
    auto& obj = objective_row();
    while (iterations < opt.max_iterations) {
      const bool bland = degenerate_run >= opt.degenerate_switch;
      std::size_t pc = cols_;
      double best = -opt.optimality_tol;
      for (std::size_t c = 0; c < cols_; ++c) {
        if (!allowed[c]) continue;
        if (obj[c] < best) {
          pc = c;
          if (bland) break;
          best = obj[c];
        }
      }
      if (pc == cols_) return Status::kOptimal;

      std::size_t pr = rows_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = t_[r][pc];
        if (a <= opt.pivot_tol) continue;
        const double ratio = std::max(t_[r][cols_], 0.0) / a;
        if (ratio < best_ratio - 1e-15 ||
            (ratio <= best_ratio + 1e-15 && pr < rows_ &&
             basis_[r] < basis_[pr])) {
          best_ratio = ratio;
          pr = r;
        }
      }
      if (pr == rows_) return Status::kUnbounded;
      degenerate_run = best_ratio <= 1e-14 ? degenerate_run + 1 : 0;
      Pivot(pr, pc);
      ++iterations;
    }
    return Status::kIterationLimit;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::vector<double>> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace internal

// Largest constraint violation of x, each row scaled by max(1, |row|_inf).
inline double MaxResidual(const Problem& p, const std::vector<double>& x) {
  auto row_scale = [](const std::vector<double>& row) {
    double m = 1.0;
    for (double v : row) m = std::max(m, std::abs(v));
    return m;
  };
  double worst = 0.0;
  for (double v : x) worst = std::max(worst, -v);
  for (std::size_t r = 0; r < p.a_eq.size(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += p.a_eq[r][c] * x[c];
    worst = std::max(worst, std::abs(s - p.b_eq[r]) / row_scale(p.a_eq[r]));
  }
  for (std::size_t r = 0; r < p.a_le.size(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += p.a_le[r][c] * x[c];
    worst = std::max(worst, (s - p.b_le[r]) / row_scale(p.a_le[r]));
  }
  return worst;
}

inline Result Solve(const Problem& p, const Options& opt = {}) {
  const std::size_t n = p.num_vars();
  const std::size_t m_eq = p.a_eq.size();
  const std::size_t m_le = p.a_le.size();
  const std::size_t m = m_eq + m_le;

  // Column layout: [structural n][slack/surplus m_le][artificial per row
  // that needs one]. A <= row with b >= 0 starts basic on its slack; every
  // other row gets an artificial.
  std::vector<int> artificial_of(m, -1);
  std::size_t n_art = 0;
  for (std::size_t r = 0; r < m; ++r) {
    const bool le_row = r >= m_eq;
    const double b = le_row ? p.b_le[r - m_eq] : p.b_eq[r];
    if (!le_row || b < 0.0) artificial_of[r] = static_cast<int>(n_art++);
  }
  const std::size_t cols = n + m_le + n_art;
  internal::Tableau tab(m, cols);

  for (std::size_t r = 0; r < m; ++r) {
    const bool le_row = r >= m_eq;
    const auto& row = le_row ? p.a_le[r - m_eq] : p.a_eq[r];
    double b = le_row ? p.b_le[r - m_eq] : p.b_eq[r];
    const double sign = b < 0.0 ? -1.0 : 1.0;
    for (std::size_t c = 0; c < n; ++c) tab.at(r, c) = sign * row[c];
    if (le_row) tab.at(r, n + (r - m_eq)) = sign;
    tab.rhs(r) = sign * b;
    if (artificial_of[r] >= 0) {
      const std::size_t ac = n + m_le + static_cast<std::size_t>(artificial_of[r]);
      tab.at(r, ac) = 1.0;
      tab.basis()[r] = ac;
    } else {
      tab.basis()[r] = n + (r - m_eq);
    }
  }

  Result result;
  std::vector<bool> allowed(cols, true);

  // Phase 1: minimize the sum of artificials.
  if (n_art > 0) {
    auto& obj = tab.objective_row();
    std::fill(obj.begin(), obj.end(), 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      if (artificial_of[r] < 0) continue;
      for (std::size_t c = 0; c <= cols; ++c) {
        if (c >= n + m_le && c < cols) continue;
        obj[c] -= (c == cols) ? tab.rhs(r) : tab.at(r, c);
      }
    }
    const Status s1 = tab.Run(allowed, opt, result.iterations);
    if (s1 == Status::kIterationLimit) {
      result.status = s1;
      return result;
    }
    result.infeasibility = -tab.objective_row()[cols];
    double worst_art = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis()[r] >= n + m_le && tab.rhs(r) > worst_art) {
        worst_art = tab.rhs(r);
        for (std::size_t q = 0; q < m; ++q) {
          if (artificial_of[q] >= 0 &&
              n + m_le + static_cast<std::size_t>(artificial_of[q]) ==
                  tab.basis()[r]) {
            result.worst_row = static_cast<int>(q);
          }
        }
      }
    }
    if (result.infeasibility > opt.feasibility_tol) {
      result.status = Status::kInfeasible;
      return result;
    }
    // Drive remaining (zero-valued) artificials out of the basis.
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis()[r] < n + m_le) continue;
      std::size_t best_c = cols;
      double best_abs = opt.pivot_tol;
      for (std::size_t c = 0; c < n + m_le; ++c) {
        if (std::abs(tab.at(r, c)) > best_abs) {
          best_abs = std::abs(tab.at(r, c));
          best_c = c;
        }
      }
      if (best_c < cols) tab.Pivot(r, best_c);
    }
    for (std::size_t c = n + m_le; c < cols; ++c) allowed[c] = false;
  }

  // Phase 2: real objective expressed in terms of the non-basic columns.
  {
    auto& obj = tab.objective_row();
    std::fill(obj.begin(), obj.end(), 0.0);
    for (std::size_t c = 0; c < n; ++c) obj[c] = p.cost[c];
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t bc = tab.basis()[r];
      const double cb = bc < n ? p.cost[bc] : 0.0;
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c <= cols; ++c) obj[c] -= cb * tab.at(r, c);
    }
  }
  const Status s2 = tab.Run(allowed, opt, result.iterations);
  if (s2 != Status::kOptimal) {
    result.status = s2;
    return result;
  }

  // Recover x from the tableau, then refine the basic block by solving
  // B x_B = b against the original rows.
  std::vector<double> full(cols, 0.0);
  for (std::size_t r = 0; r < m; ++r) full[tab.basis()[r]] = tab.rhs(r);

  {
    std::vector<std::vector<double>> bmat(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m);
    for (std::size_t r = 0; r < m; ++r) {
      const bool le_row = r >= m_eq;
      const auto& row = le_row ? p.a_le[r - m_eq] : p.a_eq[r];
      rhs[r] = le_row ? p.b_le[r - m_eq] : p.b_eq[r];
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t bc = tab.basis()[k];
        if (bc < n) {
          bmat[r][k] = row[bc];
        } else if (bc < n + m_le) {
          bmat[r][k] = (le_row && bc - n == r - m_eq) ? 1.0 : 0.0;
        } else {
          // Leftover artificial on a redundant row; it stays at zero.
          bmat[r][k] = (static_cast<int>(bc - n - m_le) == artificial_of[r])
                           ? (rhs[r] < 0.0 ? -1.0 : 1.0)
                           : 0.0;
        }
      }
    }
    std::vector<double> refined = rhs;
    if (internal::SolveDense(bmat, refined)) {
      std::vector<double> candidate(cols, 0.0);
      for (std::size_t k = 0; k < m; ++k) candidate[tab.basis()[k]] = refined[k];
      std::vector<double> xc(candidate.begin(), candidate.begin() + n);
      std::vector<double> xt(full.begin(), full.begin() + n);
      for (double& v : xc) v = std::max(v, 0.0);
      for (double& v : xt) v = std::max(v, 0.0);
      if (MaxResidual(p, xc) <= MaxResidual(p, xt)) full = candidate;
    }
  }

  result.x.assign(full.begin(), full.begin() + n);
  for (double& v : result.x) v = std::max(v, 0.0);
  result.objective = 0.0;
  for (std::size_t c = 0; c < n; ++c) result.objective += p.cost[c] * result.x[c];
  result.max_residual = MaxResidual(p, result.x);
  // Badly scaled rows can let phase 1 accept a point the original system
  // does not admit; the residual of the recovered x is the final word.
  if (result.max_residual > opt.feasibility_tol) {
    result.infeasibility = std::max(result.infeasibility, result.max_residual);
    result.status = Status::kInfeasible;
    return result;
  }
  result.status = Status::kOptimal;
  return result;
}

}  // namespace imvu::lp
