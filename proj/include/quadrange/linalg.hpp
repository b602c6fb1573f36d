#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "quadrange/matrix.hpp"

namespace quadrange {

// Eigenvalues ascending; vectors[k] is the unit eigenvector paired with
// values[k]. Vector signs are normalized so the largest-magnitude component
// (lowest index on ties) is positive, which keeps repeated runs bit-identical.
struct Spectrum {
  Vec values;
  std::vector<Vec> vectors;
};

enum class Definiteness {
  PositiveDefinite,
  PositiveSemidefinite,
  Indefinite,
  NegativeSemidefinite,
  NegativeDefinite,
};

inline const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite: return "positive_definite";
    case Definiteness::PositiveSemidefinite: return "positive_semidefinite";
    case Definiteness::Indefinite: return "indefinite";
    case Definiteness::NegativeSemidefinite: return "negative_semidefinite";
    case Definiteness::NegativeDefinite: return "negative_definite";
  }
  return "indefinite";
}

// Cyclic Jacobi with a fixed row-major sweep order. Converges when the
// off-diagonal Frobenius mass drops below 1e-12 * ||A||_F; 100 sweeps is far
// beyond what symmetric Jacobi needs at these sizes. No data-dependent
// pivoting, so the rotation sequence (and hence every output bit) is a pure
// function of the input.
inline Spectrum eigendecompose(const SymMatrix& A) {
  const int n = A.dim();
  std::vector<double> w(A.data());
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

  auto at = [n](std::vector<double>& m, int i, int j) -> double& {
    return m[static_cast<std::size_t>(i) * n + j];
  };

  double norm_f = 0.0;
  for (double x : w) norm_f += x * x;
  norm_f = std::sqrt(norm_f);
  const double off_tol = 1e-12 * norm_f;

  for (int sweep = 0; sweep < 100 && n > 1; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off += 2.0 * at(w, p, q) * at(w, p, q);
    if (std::sqrt(off) <= off_tol) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(w, p, q);
        if (apq == 0.0) continue;
        const double app = at(w, p, p);
        const double aqq = at(w, q, q);
        const double theta = 0.5 * (aqq - app) / apq;
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;  // limit form, avoids theta*theta overflow
        } else {
          t = std::copysign(1.0, theta) /
              (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        at(w, p, p) = app - t * apq;
        at(w, q, q) = aqq + t * apq;
        at(w, p, q) = 0.0;
        at(w, q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = at(w, k, p);
          const double akq = at(w, k, q);
          at(w, k, p) = akp - s * (akq + tau * akp);
          at(w, p, k) = at(w, k, p);
          at(w, k, q) = akq + s * (akp - tau * akq);
          at(w, q, k) = at(w, k, q);
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = at(v, k, p);
          const double vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return at(w, i, i) < at(w, j, j);
  });

  Spectrum sp;
  sp.values.resize(n);
  sp.vectors.assign(n, Vec(n));
  for (int k = 0; k < n; ++k) {
    const int c = order[k];
    sp.values[k] = at(w, c, c);
    Vec& vec = sp.vectors[k];
    for (int i = 0; i < n; ++i) vec[i] = at(v, i, c);
    int pivot = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(vec[i]) > std::abs(vec[pivot])) pivot = i;
    if (vec[pivot] < 0.0)
      for (double& x : vec) x = -x;
  }
  return sp;
}

inline double lambda_min(const SymMatrix& A) {
  return eigendecompose(A).values.front();
}

inline double lambda_max(const SymMatrix& A) {
  return eigendecompose(A).values.back();
}

// Five-way sign classification with threshold tol * (1 + ||A||_max).
// Matrices whose whole spectrum sits inside the threshold band come out
// PositiveSemidefinite (the zero matrix in particular).
inline Definiteness classify_definiteness(const SymMatrix& A,
                                          double tol = 1e-12) {
  if (tol < 0.0) throw InvalidInput("classify_definiteness: negative tol");
  const Spectrum sp = eigendecompose(A);
  const double thr = tol * (1.0 + A.max_abs());
  const double lo = sp.values.front();
  const double hi = sp.values.back();
  if (lo > thr) return Definiteness::PositiveDefinite;
  if (hi < -thr) return Definiteness::NegativeDefinite;
  if (lo >= -thr) return Definiteness::PositiveSemidefinite;
  if (hi <= thr) return Definiteness::NegativeSemidefinite;
  return Definiteness::Indefinite;
}

namespace detail {

// Q f(Lambda) Q^T assembled column by column.
template <class F>
SymMatrix spectral_map(const Spectrum& sp, F&& f) {
  const int n = static_cast<int>(sp.values.size());
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        s += f(sp.values[k]) * sp.vectors[k][i] * sp.vectors[k][j];
      m.set(i, j, s);
    }
  }
  return m;
}

}  // namespace detail

// Symmetric PSD square root. Eigenvalues in [-tol*(1+||A||_max), 0) are
// clamped to zero; anything below that band is a genuine violation.
inline SymMatrix sqrt_psd(const SymMatrix& A, double tol = 1e-12) {
  const Spectrum sp = eigendecompose(A);
  const double thr = tol * (1.0 + A.max_abs());
  if (sp.values.front() < -thr)
    throw NotPsd("sqrt_psd: eigenvalue " + std::to_string(sp.values.front()) +
                 " below tolerance band");
  return detail::spectral_map(
      sp, [](double l) { return l > 0.0 ? std::sqrt(l) : 0.0; });
}

// Moore-Penrose inverse by spectral truncation: eigenvalues with
// |lambda| <= rank_tol * max|lambda| are treated as exact zeros.
inline SymMatrix pseudoinverse(const SymMatrix& A, double rank_tol = 1e-12) {
  const Spectrum sp = eigendecompose(A);
  double lmax = 0.0;
  for (double l : sp.values) lmax = std::max(lmax, std::abs(l));
  const double cut = rank_tol * lmax;
  return detail::spectral_map(
      sp, [cut](double l) { return std::abs(l) > cut ? 1.0 / l : 0.0; });
}

// Exact inverse of a nonsingular bordered operator via the Schur complement
// z = s - d^T A^{-1} d:
//   [ A^{-1} + A^{-1} d z^{-1} d^T A^{-1}    -A^{-1} d z^{-1} ]
//   [        -z^{-1} d^T A^{-1}                    z^{-1}     ]
// Throws SingularBlock if A has an eigenvalue inside the tolerance band or z
// itself is inside the band.
inline BlockOperator block_schur_inverse(const BlockOperator& Z,
                                         double tol = 1e-12) {
  const int n = Z.A.dim();
  if (Z.d.size() != static_cast<std::size_t>(n))
    throw InvalidInput("block_schur_inverse: border length mismatch");
  const Spectrum sp = eigendecompose(Z.A);
  double min_abs = std::abs(sp.values[0]);
  for (double l : sp.values) min_abs = std::min(min_abs, std::abs(l));
  if (min_abs <= tol * (1.0 + Z.A.max_abs()))
    throw SingularBlock("block_schur_inverse: leading block singular");

  const SymMatrix a_inv =
      detail::spectral_map(sp, [](double l) { return 1.0 / l; });
  const Vec aid = a_inv.apply(Z.d);
  const double z = Z.s - dot(Z.d, aid);
  if (std::abs(z) <= tol * (1.0 + Z.max_abs()))
    throw SingularBlock("block_schur_inverse: Schur complement ~ 0");
  const double zi = 1.0 / z;

  BlockOperator out;
  out.A = a_inv;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      out.A.set(i, j, out.A(i, j) + zi * aid[i] * aid[j]);
  out.d = scaled(aid, -zi);
  out.s = zi;
  return out;
}

}  // namespace quadrange
