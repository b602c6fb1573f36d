#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "quadrange/matrix.hpp"

namespace quadrange {

// Golden-section maximization on [lo, hi] for a unimodal-ish f; a fixed
// iteration count keeps the evaluation sequence identical across runs.
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, int iters) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 >= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

// Derivative-free simplex maximization. Used where the objective has kinks
// (eigenvalue crossings) that jam coordinate-wise line searches. Ties break
// by vertex index, so the run is deterministic.
template <class F>
std::pair<Vec, double> nelder_mead_max(F&& f, const Vec& x0, double step,
                                       int iters) {
  const std::size_t k = x0.size();
  std::vector<Vec> v(k + 1, x0);
  std::vector<double> fv(k + 1);
  for (std::size_t i = 0; i < k; ++i) v[i + 1][i] += step;
  for (std::size_t i = 0; i <= k; ++i) fv[i] = f(v[i]);

  std::vector<std::size_t> ord(k + 1);
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i <= k; ++i) ord[i] = i;
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] > fv[b]; });
    const std::size_t best = ord[0], second_worst = ord[k - 1], worst = ord[k];
    if (fv[best] - fv[worst] <= 1e-14 * (1.0 + std::abs(fv[best]))) break;

    Vec c(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) axpy(1.0 / k, v[ord[i]], c);
    Vec xr = scaled(c, 2.0);
    axpy(-1.0, v[worst], xr);
    const double fr = f(xr);

    if (fr > fv[best]) {
      Vec xe = scaled(c, 3.0);
      axpy(-2.0, v[worst], xe);
      const double fe = f(xe);
      if (fe > fr) {
        v[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        v[worst] = std::move(xr);
        fv[worst] = fr;
      }
    } else if (fr > fv[second_worst]) {
      v[worst] = std::move(xr);
      fv[worst] = fr;
    } else {
      Vec xc = scaled(c, 0.5);
      axpy(0.5, fr > fv[worst] ? xr : v[worst], xc);
      const double fc = f(xc);
      if (fc > std::max(fr, fv[worst])) {
        v[worst] = std::move(xc);
        fv[worst] = fc;
      } else {
        for (std::size_t i = 1; i <= k; ++i) {
          Vec& vi = v[ord[i]];
          for (std::size_t j = 0; j < k; ++j)
            vi[j] = v[best][j] + 0.5 * (vi[j] - v[best][j]);
          fv[ord[i]] = f(vi);
        }
      }
    }
  }
  std::size_t arg = 0;
  for (std::size_t i = 1; i <= k; ++i)
    if (fv[i] > fv[arg]) arg = i;
  return {v[arg], fv[arg]};
}

struct DescentOptions {
  int max_iters = 500;
  double init_step = 1.0;
  double backtrack = 0.5;
  int max_backtracks = 40;
  double grad_tol = 1e-13;
};

struct DescentResult {
  Vec x;
  double value = 0.0;
  int iters = 0;
};

// Plain gradient descent with backtracking line search. `project` is applied
// after every trial step (identity for unconstrained problems, normalization
// for sphere-constrained ones).
template <class F, class G, class P>
DescentResult gradient_descent(F&& f, G&& grad, P&& project, Vec x,
                               const DescentOptions& opt = {}) {
  project(x);
  double fx = f(x);
  double step = opt.init_step;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    Vec g = grad(x);
    const double gn = norm2(g);
    if (gn <= opt.grad_tol * (1.0 + std::abs(fx))) break;
    bool accepted = false;
    double s = step;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      Vec xn = x;
      axpy(-s / gn, g, xn);
      project(xn);
      const double fn = f(xn);
      if (fn < fx - 1e-12 * std::abs(fx)) {
        x = std::move(xn);
        fx = fn;
        step = s * 1.5;
        accepted = true;
        break;
      }
      s *= opt.backtrack;
    }
    if (!accepted) break;
  }
  return {std::move(x), fx, it};
}

template <class F, class G>
DescentResult gradient_descent(F&& f, G&& grad, Vec x,
                               const DescentOptions& opt = {}) {
  return gradient_descent(std::forward<F>(f), std::forward<G>(grad),
                          [](Vec&) {}, std::move(x), opt);
}

namespace detail {

// Gaussian elimination with partial pivoting for the tiny k x k systems that
// show up in the damped least-squares step. Returns false when singular.
inline bool solve_small(std::vector<Vec> a, Vec b, Vec& out) {
  const int k = static_cast<int>(a.size());
  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int r = col + 1; r < k; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int j = col; j < k; ++j) a[r][j] -= f * a[col][j];
      b[r] -= f * b[col];
    }
  }
  out.assign(k, 0.0);
  for (int i = 0; i < k; ++i) out[i] = b[i] / a[i][i];
  return true;
}

}  // namespace detail

struct LeastSquaresResult {
  Vec x;
  double sq_norm = 0.0;  // ||r||^2 at x
  int iters = 0;
};

// Damped Gauss-Newton (Levenberg style) for small residual systems
// r: R^n -> R^k with k << n. `residual` returns r(x) and `jac_rows` the k
// gradient rows of r. The step solves (J J^T + mu I) y = r, delta = -J^T y,
// which is the damped least-norm update; mu adapts on acceptance.
template <class R, class J>
LeastSquaresResult gauss_newton(R&& residual, J&& jac_rows, Vec x,
                                int max_iters = 120) {
  Vec r = residual(x);
  double f = dot(r, r);
  double mu = 0.0;
  int rejects = 0;
  int it = 0;
  for (; it < max_iters; ++it) {
    if (f <= 1e-30) break;
    std::vector<Vec> jr = jac_rows(x);
    const int k = static_cast<int>(jr.size());
    std::vector<Vec> jjt(k, Vec(k, 0.0));
    double tr = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) {
        const double v = dot(jr[i], jr[j]);
        jjt[i][j] = v;
        jjt[j][i] = v;
        if (i == j) tr += v;
      }
    if (mu == 0.0) mu = 1e-12 * (tr / k + 1.0);

    bool accepted = false;
    for (int attempt = 0; attempt < 25; ++attempt) {
      std::vector<Vec> m = jjt;
      for (int i = 0; i < k; ++i) m[i][i] += mu;
      Vec y;
      if (!detail::solve_small(m, r, y)) {
        mu = mu * 10.0 + 1e-12;
        continue;
      }
      Vec xn = x;
      for (int i = 0; i < k; ++i) axpy(-y[i], jr[i], xn);
      Vec rn = residual(xn);
      const double fn = dot(rn, rn);
      if (fn < f) {
        x = std::move(xn);
        r = std::move(rn);
        f = fn;
        mu *= 0.35;
        accepted = true;
        break;
      }
      mu = mu * 10.0 + 1e-12;
    }
    if (!accepted && ++rejects >= 2) break;
    if (accepted) rejects = 0;
  }
  return {std::move(x), f, it};
}

}  // namespace quadrange
