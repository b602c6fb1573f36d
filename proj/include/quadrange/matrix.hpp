#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "quadrange/errors.hpp"

namespace quadrange {

using Vec = std::vector<double>;

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

inline double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

inline void axpy(double a, std::span<const double> x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline Vec scaled(std::span<const double> x, double a) {
  Vec r(x.begin(), x.end());
  for (double& v : r) v *= a;
  return r;
}

inline Vec vsub(std::span<const double> x, std::span<const double> y) {
  Vec r(x.begin(), x.end());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
  return r;
}

inline Vec vadd(std::span<const double> x, std::span<const double> y) {
  Vec r(x.begin(), x.end());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += y[i];
  return r;
}

inline bool all_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

// Dense real symmetric matrix. Symmetry is enforced at construction by
// averaging (M + M^T)/2, so entries (i,j) and (j,i) are bitwise equal.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {
    if (n < 1) throw InvalidInput("SymMatrix: dimension must be >= 1");
  }

  // Row-major n*n entries; symmetrized on ingest, rejects non-finite values.
  static SymMatrix from_rows(int n, std::span<const double> rows) {
    if (n < 1) throw InvalidInput("SymMatrix: dimension must be >= 1");
    if (rows.size() != static_cast<std::size_t>(n) * n)
      throw InvalidInput("SymMatrix: expected " + std::to_string(n) + "x" +
                         std::to_string(n) + " entries");
    if (!all_finite(rows)) throw InvalidInput("SymMatrix: non-finite entry");
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        m.a_[idx(n, i, j)] =
            0.5 * (rows[idx(n, i, j)] + rows[idx(n, j, i)]);
    return m;
  }

  static SymMatrix identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m.a_[idx(n, i, i)] = 1.0;
    return m;
  }

  static SymMatrix zero(int n) { return SymMatrix(n); }

  static SymMatrix diagonal(std::span<const double> d) {
    if (d.empty()) throw InvalidInput("SymMatrix: empty diagonal");
    if (!all_finite(d)) throw InvalidInput("SymMatrix: non-finite entry");
    SymMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.n_; ++i) m.a_[idx(m.n_, i, i)] = d[i];
    return m;
  }

  static SymMatrix diagonal(std::initializer_list<double> d) {
    return diagonal(std::span<const double>(d.begin(), d.size()));
  }

  int dim() const { return n_; }

  double operator()(int i, int j) const { return a_[idx(n_, i, j)]; }

  // Sets both (i,j) and (j,i); the only mutation path, keeps symmetry exact.
  void set(int i, int j, double v) {
    if (!std::isfinite(v)) throw InvalidInput("SymMatrix: non-finite entry");
    a_[idx(n_, i, j)] = v;
    a_[idx(n_, j, i)] = v;
  }

  const std::vector<double>& data() const { return a_; }

  Vec apply(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(n_))
      throw InvalidInput("SymMatrix::apply: length mismatch");
    Vec y(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      const double* row = a_.data() + static_cast<std::size_t>(i) * n_;
      for (int j = 0; j < n_; ++j) s += row[j] * x[j];
      y[i] = s;
    }
    return y;
  }

  // <Ax, x>
  double quad(std::span<const double> x) const {
    Vec y = apply(x);
    return dot(y, x);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  double frob() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

  SymMatrix& add_scaled(const SymMatrix& b, double c) {
    if (b.n_ != n_) throw InvalidInput("SymMatrix: dimension mismatch");
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += c * b.a_[k];
    return *this;
  }

  SymMatrix scaled_by(double c) const {
    SymMatrix m = *this;
    for (double& v : m.a_) v *= c;
    return m;
  }

  friend bool operator==(const SymMatrix& x, const SymMatrix& y) {
    return x.n_ == y.n_ && x.a_ == y.a_;
  }

 private:
  static std::size_t idx(int n, int i, int j) {
    return static_cast<std::size_t>(i) * n + j;
  }
  int n_ = 0;
  std::vector<double> a_;
};

inline SymMatrix lincomb(std::span<const double> c,
                         std::span<const SymMatrix> mats) {
  if (c.size() != mats.size() || mats.empty())
    throw InvalidInput("lincomb: need one coefficient per matrix");
  SymMatrix m(mats[0].dim());
  for (std::size_t k = 0; k < mats.size(); ++k) m.add_scaled(mats[k], c[k]);
  return m;
}

// Bordered symmetric operator
//     [ A    d ]
//     [ d^T  s ]
// used for one-dimension extensions of a base space.
struct BlockOperator {
  SymMatrix A;
  Vec d;
  double s = 0.0;

  int dim() const { return A.dim() + 1; }

  SymMatrix as_dense() const {
    if (d.size() != static_cast<std::size_t>(A.dim()))
      throw InvalidInput("BlockOperator: border length mismatch");
    const int n = A.dim();
    SymMatrix m(n + 1);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) m.set(i, j, A(i, j));
    for (int i = 0; i < n; ++i) m.set(i, n, d[i]);
    m.set(n, n, s);
    return m;
  }

  double max_abs() const {
    double m = A.max_abs();
    for (double v : d) m = std::max(m, std::abs(v));
    return std::max(m, std::abs(s));
  }
};

}  // namespace quadrange
