#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "quadrange/linalg.hpp"
#include "quadrange/numrange.hpp"
#include "quadrange/quadform.hpp"

namespace quadrange {

// Border block [[A, a/2],[a^T/2, b]]; its quadratic form on (x, t) equals
// t^2 phi(x/t) for t != 0 and <Ax,x> at t = 0.
inline BlockOperator homogenize(const QuadForm& phi) {
  return BlockOperator{phi.A, scaled(phi.a, 0.5), phi.b};
}

// Homogenization with the corner shifted by mu3, i.e. the block of
// phi + mu3 * (corner unit form). PD exactly when mu3 exceeds mu3_bound(phi).
inline BlockOperator homogenize_shifted(const QuadForm& phi, double mu3) {
  return BlockOperator{phi.A, scaled(phi.a, 0.5), phi.b + mu3};
}

// Threshold ||A^{-1/2}(a/2)||^2 - b. Any mu3 strictly above it makes the
// shifted block positive definite; anything strictly below breaks it.
inline double mu3_bound(const QuadForm& phi) {
  if (classify_definiteness(phi.A) != Definiteness::PositiveDefinite)
    throw NotPd("mu3_bound: quadratic part must be positive definite");
  const Spectrum sp = eigendecompose(phi.A);
  const Vec half = scaled(phi.a, 0.5);
  double q = 0.0;
  for (std::size_t i = 0; i < sp.values.size(); ++i) {
    const double c = dot(sp.vectors[i], half);
    q += c * c / sp.values[i];
  }
  return q - phi.b;
}

// Linear change of coordinates on a tuple of forms, kept with its own
// invertibility verdict so singular maps are usable but flagged.
struct PencilTransform {
  std::vector<Vec> rows;  // k rows of k coefficients, k in {2, 3}
  double det = 0.0;
  bool invertible = false;

  static PencilTransform make(std::vector<Vec> rows_in) {
    const std::size_t k = rows_in.size();
    if (k != 2 && k != 3)
      throw InvalidInput("PencilTransform: need a 2x2 or 3x3 matrix");
    double mx = 0.0;
    for (const Vec& r : rows_in) {
      if (r.size() != k)
        throw InvalidInput("PencilTransform: ragged coefficient matrix");
      if (!all_finite(r))
        throw InvalidInput("PencilTransform: non-finite coefficient");
      mx = std::max(mx, norm_inf(r));
    }
    PencilTransform t;
    t.rows = std::move(rows_in);
    const auto& m = t.rows;
    if (k == 2) {
      t.det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    } else {
      t.det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
              m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
              m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }
    t.invertible = std::abs(t.det) > 1e-12 * std::pow(mx, static_cast<double>(k));
    return t;
  }
};

inline std::vector<QuadForm> apply_transform(const PencilTransform& T,
                                             std::span<const QuadForm> tuple,
                                             bool require_invertible = false) {
  if (tuple.size() != T.rows.size())
    throw InvalidInput("apply_transform: arity mismatch");
  if (require_invertible && !T.invertible)
    throw SingularTransform("apply_transform: transform is singular");
  const int n = tuple[0].dim();
  for (const QuadForm& f : tuple)
    if (f.dim() != n) throw InvalidInput("apply_transform: dimension mismatch");

  std::vector<QuadForm> out;
  out.reserve(T.rows.size());
  for (const Vec& row : T.rows) {
    SymMatrix A = SymMatrix::zero(n);
    Vec a(n, 0.0);
    double b = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      A.add_scaled(tuple[i].A, row[i]);
      axpy(row[i], tuple[i].a, a);
      b += row[i] * tuple[i].b;
    }
    out.emplace_back(std::move(A), std::move(a), b);
  }
  return out;
}

enum class FamilyKind { VanishingDiag, ConvergentDiag };

// Diagonal model pairs A0 = diag(alpha_n), A1 = diag(alpha_n (1 + 1/n)).
// The default rules are alpha_n = 1/n (vanishing) and 1 + 1/(2n) (convergent);
// a custom positive rule may replace them.
struct CounterexampleFamily {
  FamilyKind kind = FamilyKind::VanishingDiag;
  int N = 2;
  std::function<double(int)> alpha;  // 1-based index; empty = default rule

  double alpha_at(int n) const {
    if (alpha) return alpha(n);
    if (kind == FamilyKind::VanishingDiag) return 1.0 / n;
    return 1.0 + 1.0 / (2.0 * n);
  }
};

inline std::pair<SymMatrix, SymMatrix> build_counterexample(
    const CounterexampleFamily& fam) {
  if (fam.N < 2) throw InvalidInput("build_counterexample: N must be >= 2");
  Vec d0(fam.N), d1(fam.N);
  for (int n = 1; n <= fam.N; ++n) {
    const double a = fam.alpha_at(n);
    if (!(a > 0.0) || !std::isfinite(a))
      throw InvalidInput("build_counterexample: alpha must be positive");
    d0[n - 1] = a;
    d1[n - 1] = a * (1.0 + 1.0 / n);
  }
  if (fam.kind == FamilyKind::VanishingDiag && !(d0[fam.N - 1] < d0[0]))
    throw InvalidInput("build_counterexample: vanishing rule must decrease");
  return {SymMatrix::diagonal(std::span<const double>(d0)),
          SymMatrix::diagonal(std::span<const double>(d1))};
}

struct GapRow {
  int N = 0;
  double best_residual = 0.0;
  double witness_norm = 0.0;
};

// For each truncation, how close the full-space image gets to `target`.
// The analytic witness x = alpha_N^{-1/2} e_N lands on (1, 1 + 1/N), so for
// target (1,1) every row is bounded by 1/N; the probe result is only taken
// when it beats the witness.
inline std::vector<GapRow> gap_table(const CounterexampleFamily& fam,
                                     std::span<const int> truncations,
                                     const Vec& target,
                                     std::uint64_t seed = 0) {
  if (truncations.empty()) throw InvalidInput("gap_table: no truncations");
  for (std::size_t i = 1; i < truncations.size(); ++i)
    if (truncations[i] <= truncations[i - 1])
      throw InvalidInput("gap_table: truncations must be ascending");
  if (target.size() != 2) throw InvalidInput("gap_table: planar target only");

  std::vector<GapRow> rows;
  rows.reserve(truncations.size());
  for (const int N : truncations) {
    CounterexampleFamily f = fam;
    f.N = N;
    const auto [a0, a1] = build_counterexample(f);
    const SymMatrix ops_arr[2] = {a0, a1};
    const std::vector<QuadForm> forms =
        lift_tuple(std::span<const SymMatrix>(ops_arr, 2));

    const double h = 1.0 / N;
    const double ustar = (2.0 + h) / (2.0 + 2.0 * h + h * h);
    Vec witness(N, 0.0);
    witness[N - 1] = 1.0 / std::sqrt(f.alpha_at(N));
    Vec witness_scaled = scaled(witness, std::sqrt(ustar));
    const double witness_res =
        norm2(vsub(evaluate_tuple(forms, witness), target));
    std::vector<Vec> extra;
    extra.push_back(witness);
    extra.push_back(std::move(witness_scaled));

    const ProbeResult probe =
        closedness_probe(std::span<const QuadForm>(forms), target, 32,
                         seed + static_cast<std::uint64_t>(N), extra);
    GapRow row;
    row.N = N;
    if (probe.residual <= witness_res) {
      row.best_residual = probe.residual;
      row.witness_norm = norm2(probe.x);
    } else {
      row.best_residual = witness_res;
      row.witness_norm = norm2(witness);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace quadrange
