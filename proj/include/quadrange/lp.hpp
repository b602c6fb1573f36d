#pragma once

// Small dense linear programming support: maximize c.x subject to A x <= b
// with x free. The intended sizes are a handful of variables against at most
// a few thousand constraints, which a two-phase tableau simplex with Bland's
// rule handles deterministically and without cycling.

#include <cmath>
#include <cstddef>
#include <vector>

#include "quadrange/errors.hpp"
#include "quadrange/matrix.hpp"

namespace quadrange {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vec x;
  double value = 0.0;
};

namespace detail {

class SimplexTableau {
 public:
  // cols: structural variables; extra artificial columns are appended later.
  SimplexTableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), t_(rows + 1, Vec(cols + 1, 0.0)), basis_(rows, 0) {}

  Vec& row(std::size_t i) { return t_[i]; }
  Vec& objective() { return t_[m_]; }
  std::vector<std::size_t>& basis() { return basis_; }

  // Bland: entering = lowest-index column with positive reduced cost,
  // leaving = min-ratio row, ties broken by lowest basis variable index.
  // Returns false on unboundedness.
  bool run(double eps = 1e-11) {
    for (std::size_t guard = 0; guard < 100000; ++guard) {
      std::size_t enter = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (t_[m_][j] > eps) {
          enter = j;
          break;
        }
      }
      if (enter == n_) return true;  // optimal

      std::size_t leave = m_;
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = t_[i][enter];
        if (a <= eps) continue;
        const double ratio = t_[i][n_] / a;
        if (leave == m_ || ratio < best_ratio - eps ||
            (ratio < best_ratio + eps && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave == m_) return false;  // unbounded direction
      pivot(leave, enter);
    }
    return true;  // iteration guard;-(treat as converged at current vertex)
  }

  void pivot(std::size_t r, std::size_t c) {
    const double p = t_[r][c];
    for (double& v : t_[r]) v /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_[i][c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) t_[i][j] -= f * t_[r][j];
    }
    basis_[r] = c;
  }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

 private:
  std::size_t m_, n_;
  std::vector<Vec> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

// rows_a[i] . x <= b[i]; free x is split internally into positive parts.
inline LpResult solve_lp_max(const std::vector<Vec>& rows_a, const Vec& b,
                             const Vec& c) {
  const std::size_t m = rows_a.size();
  if (b.size() != m) throw InvalidInput("solve_lp_max: row count mismatch");
  const std::size_t nf = c.size();
  for (const Vec& r : rows_a)
    if (r.size() != nf) throw InvalidInput("solve_lp_max: row length mismatch");

  const std::size_t nsplit = 2 * nf;           // x = u - w
  const std::size_t nslack = m;
  std::size_t nart = 0;
  for (double bi : b)
    if (bi < 0.0) ++nart;
  const std::size_t ncols = nsplit + nslack + nart;

  detail::SimplexTableau tab(m, ncols);
  std::size_t art = nsplit + nslack;
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    Vec& row = tab.row(i);
    for (std::size_t j = 0; j < nf; ++j) {
      row[2 * j] = sign * rows_a[i][j];
      row[2 * j + 1] = -sign * rows_a[i][j];
    }
    row[nsplit + i] = sign;  // slack
    row[ncols] = sign * b[i];
    if (b[i] < 0.0) {
      row[art] = 1.0;
      tab.basis()[i] = art;
      ++art;
    } else {
      tab.basis()[i] = nsplit + i;
    }
  }

  LpResult res;
  if (nart > 0) {
    // Phase 1: maximize -(sum of artificials).
    Vec& obj = tab.objective();
    for (std::size_t j = nsplit + nslack; j < ncols; ++j) obj[j] = -1.0;
    // Price out the artificial basis.
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis()[i] >= nsplit + nslack) {
        for (std::size_t j = 0; j <= ncols; ++j) obj[j] += tab.row(i)[j];
      }
    }
    tab.run();
    // The value cell carries the negated objective, so a positive entry here
    // means some artificial is still nonzero: no feasible point exists.
    if (tab.objective()[ncols] > 1e-7) {
      res.status = LpStatus::Infeasible;
      return res;
    }
    // Pivot any artificial still sitting in the basis out on a real column.
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis()[i] < nsplit + nslack) continue;
      for (std::size_t j = 0; j < nsplit + nslack; ++j) {
        if (std::abs(tab.row(i)[j]) > 1e-9) {
          tab.pivot(i, j);
          break;
        }
      }
    }
    // Retire the artificial columns: zero everywhere, so a zero reduced cost
    // keeps them out of the basis for good. A stuck artificial marks a
    // redundant row whose basis value is zero; that is harmless.
    for (std::size_t i = 0; i <= m; ++i) {
      Vec& r = i == m ? tab.objective() : tab.row(i);
      for (std::size_t j = nsplit + nslack; j < ncols; ++j) r[j] = 0.0;
    }
    Vec& o2 = tab.objective();
    for (double& v : o2) v = 0.0;
  }

  {
    Vec& obj = tab.objective();
    for (std::size_t j = 0; j < nf; ++j) {
      obj[2 * j] = c[j];
      obj[2 * j + 1] = -c[j];
    }
    // Price out the current basis.
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t bv = tab.basis()[i];
      const double f = obj[bv];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= ncols; ++j) obj[j] -= f * tab.row(i)[j];
    }
  }
  if (!tab.run()) {
    res.status = LpStatus::Unbounded;
    return res;
  }

  Vec xs(ncols, 0.0);
  for (std::size_t i = 0; i < m; ++i) xs[tab.basis()[i]] = tab.row(i)[ncols];
  res.x.assign(nf, 0.0);
  for (std::size_t j = 0; j < nf; ++j) res.x[j] = xs[2 * j] - xs[2 * j + 1];
  res.value = dot(res.x, c);
  res.status = LpStatus::Optimal;
  return res;
}

}  // namespace quadrange
