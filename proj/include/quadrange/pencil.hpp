#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "quadrange/geometry.hpp"
#include "quadrange/linalg.hpp"
#include "quadrange/numrange.hpp"
#include "quadrange/optimize.hpp"
#include "quadrange/rng.hpp"

namespace quadrange {

// Witness that some combination sum(mu_i A_i) is positive definite.
struct PencilCertificate {
  Vec mu;             // unit direction in coefficient space
  double lambda_min = 0.0;
  Vec witness;        // unit vector attaining lambda_min
};

struct PdSearchResult {
  std::optional<PencilCertificate> certificate;
  double achieved = 0.0;   // best smallest eigenvalue found
  Vec direction;           // where it was found
  // Set when |achieved| is too close to zero for either the eigenvalue
  // search or the hull oracle to be trusted.
  bool indeterminate = false;
};

// Largest alpha with <Cx,x> >= alpha ||x||^2, i.e. the smallest eigenvalue.
inline double bounded_below_constant(const SymMatrix& C) {
  return eigendecompose(C).values.front();
}

namespace detail {

inline double pencil_scale(std::span<const SymMatrix> ops) {
  double s = 0.0;
  for (const SymMatrix& a : ops) s = std::max(s, a.max_abs());
  return 1.0 + s;
}

inline PdSearchResult finish_pd_search(std::span<const SymMatrix> ops,
                                       const Vec& dir) {
  SymMatrix combo = lincomb(dir, ops);
  const Spectrum sp = eigendecompose(combo);
  PdSearchResult res;
  res.achieved = sp.values.front();
  res.direction = dir;
  res.indeterminate =
      std::abs(res.achieved) <= 1e-6 * pencil_scale(ops);
  if (classify_definiteness(combo) == Definiteness::PositiveDefinite) {
    res.certificate =
        PencilCertificate{dir, sp.values.front(), sp.vectors.front()};
  }
  return res;
}

}  // namespace detail

// Maximizes g(t) = lambda_min(cos(t) A1 + sin(t) A2) by a uniform angular
// grid followed by golden-section refinement on the best bracket. Returns a
// certificate only when the final combination classifies positive definite.
inline PdSearchResult find_pd_combination(const SymMatrix& A1,
                                          const SymMatrix& A2, int grid = 720,
                                          int refine_iters = 60) {
  if (A1.dim() != A2.dim())
    throw InvalidInput("find_pd_combination: dimension mismatch");
  if (grid < 16) throw InvalidInput("find_pd_combination: grid must be >= 16");
  const SymMatrix ops_arr[2] = {A1, A2};
  const std::span<const SymMatrix> ops(ops_arr, 2);
  constexpr double two_pi = 2.0 * 3.14159265358979323846;

  auto g = [&](double t) {
    SymMatrix m = A1.scaled_by(std::cos(t));
    m.add_scaled(A2, std::sin(t));
    return eigendecompose(m).values.front();
  };

  int best_k = 0;
  double best_g = -1e300;
  for (int k = 0; k < grid; ++k) {
    const double val = g(two_pi * k / grid);
    if (val > best_g) {
      best_g = val;
      best_k = k;
    }
  }
  double theta = two_pi * best_k / grid;
  if (refine_iters > 0) {
    const double lo = two_pi * (best_k - 1) / grid;
    const double hi = two_pi * (best_k + 1) / grid;
    theta = golden_max(g, lo, hi, refine_iters).first;
    if (g(theta) < best_g) theta = two_pi * best_k / grid;
  }
  return detail::finish_pd_search(ops, {std::cos(theta), std::sin(theta)});
}

// Same search over unit directions in R^3: spherical Fibonacci grid, then
// simplex refinement over the two spherical coordinates around the best
// grid point.
inline PdSearchResult find_pd_combination3(const SymMatrix& A1,
                                           const SymMatrix& A2,
                                           const SymMatrix& A3,
                                           int grid = 20000,
                                           int refine_iters = 60) {
  if (A1.dim() != A2.dim() || A1.dim() != A3.dim())
    throw InvalidInput("find_pd_combination3: dimension mismatch");
  if (grid < 16) throw InvalidInput("find_pd_combination3: grid must be >= 16");
  const SymMatrix ops_arr[3] = {A1, A2, A3};
  const std::span<const SymMatrix> ops(ops_arr, 3);
  constexpr double golden_angle = 2.3999632297286533;

  auto g_dir = [&](double t, double p) {
    const double st = std::sin(t);
    const Vec dir = {st * std::cos(p), st * std::sin(p), std::cos(t)};
    return eigendecompose(lincomb(dir, ops)).values.front();
  };

  double best_g = -1e300, best_t = 0.0, best_p = 0.0;
  for (int k = 0; k < grid; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / grid;
    const double t = std::acos(std::clamp(z, -1.0, 1.0));
    const double p = golden_angle * k;
    const double val = g_dir(t, p);
    if (val > best_g) {
      best_g = val;
      best_t = t;
      best_p = p;
    }
  }
  if (refine_iters > 0) {
    // Simplex refinement: lambda_min has kinks at eigenvalue crossings, and
    // coordinate-wise line searches jam on ridges diagonal to the axes.
    auto g_vec = [&](const Vec& tp) { return g_dir(tp[0], tp[1]); };
    const double step = 2.0 / std::sqrt(static_cast<double>(grid));
    const auto nm =
        nelder_mead_max(g_vec, {best_t, best_p}, step, 10 * refine_iters);
    if (nm.second > best_g) {
      best_t = nm.first[0];
      best_p = nm.first[1];
      best_g = nm.second;
    }
  }
  const double st = std::sin(best_t);
  return detail::finish_pd_search(
      ops, {st * std::cos(best_p), st * std::sin(best_p), std::cos(best_t)});
}

struct HullSeparation {
  bool separated = false;
  double margin = 0.0;  // signed distance from the origin to the sample hull
  bool indeterminate = false;
};

// Independent cross-check for find_pd_combination: a PD combination exists
// exactly when the origin is strictly separated from the planar joint range.
// Samples the sphere, enriches with boundary tracing, and tests the hull.
inline HullSeparation hull_separation_oracle(const SymMatrix& A1,
                                             const SymMatrix& A2, int samples,
                                             std::uint64_t seed) {
  if (A1.dim() != A2.dim())
    throw InvalidInput("hull_separation_oracle: dimension mismatch");
  if (samples < 100)
    throw InvalidInput("hull_separation_oracle: need >= 100 samples");
  const SymMatrix ops_arr[2] = {A1, A2};
  RangeSample s = sample_range(std::span<const SymMatrix>(ops_arr, 2),
                               SampleKind::Sphere, samples, seed);
  std::vector<Point2> pts;
  pts.reserve(s.points.size() + 64);
  for (const Vec& p : s.points) pts.push_back({p[0], p[1]});
  if (A1.dim() >= 2)
    for (const Vec& p : trace_boundary(A1, A2, 64)) pts.push_back({p[0], p[1]});

  const std::vector<Point2> hull = convex_hull(pts);
  const double margin = signed_dist_to_hull({0.0, 0.0}, hull);
  const double scale = detail::pencil_scale(std::span<const SymMatrix>(ops_arr, 2));
  HullSeparation out;
  out.margin = margin;
  out.separated = margin > 1e-8 * scale;
  out.indeterminate = std::abs(margin) <= 1e-6 * scale;
  return out;
}

}  // namespace quadrange
