#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "quadrange/geometry.hpp"
#include "quadrange/linalg.hpp"
#include "quadrange/optimize.hpp"
#include "quadrange/quadform.hpp"
#include "quadrange/rng.hpp"

namespace quadrange {

enum class SampleKind { Sphere, FullSpace };

// A batch of image points of x -> (phi_1(x), ..., phi_k(x)) together with the
// domain vectors that produced them, so every point can be recomputed.
struct RangeSample {
  int dim_out = 0;
  SampleKind kind = SampleKind::Sphere;
  std::vector<Vec> points;
  std::vector<Vec> generators;
};

namespace detail {

inline void check_tuple(std::span<const QuadForm> forms) {
  if (forms.size() < 1 || forms.size() > 3)
    throw InvalidInput("expected a tuple of 1 to 3 forms");
  for (const QuadForm& f : forms)
    if (f.dim() != forms[0].dim())
      throw InvalidInput("forms have mismatched dimensions");
}

}  // namespace detail

// Sphere: unit-norm domain vectors. FullSpace: radii log-uniform over
// [1e-3, 1e3], so the sample spans six decades of scale.
inline RangeSample sample_range(std::span<const QuadForm> forms,
                                SampleKind kind, int count,
                                std::uint64_t seed) {
  detail::check_tuple(forms);
  if (count < 1) throw InvalidInput("sample_range: count must be >= 1");
  const int n = forms[0].dim();
  Rng rng(seed);
  RangeSample s;
  s.dim_out = static_cast<int>(forms.size());
  s.kind = kind;
  s.points.reserve(count);
  s.generators.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vec x = rng.unit_vec(n);
    if (kind == SampleKind::FullSpace) {
      const double r = std::pow(10.0, rng.uniform(-3.0, 3.0));
      for (double& v : x) v *= r;
    }
    s.points.push_back(evaluate_tuple(forms, x));
    s.generators.push_back(std::move(x));
  }
  return s;
}

inline RangeSample sample_range(std::span<const SymMatrix> ops,
                                SampleKind kind, int count,
                                std::uint64_t seed) {
  const std::vector<QuadForm> forms = lift_tuple(ops);
  return sample_range(std::span<const QuadForm>(forms), kind, count, seed);
}

// Supporting points of the planar joint range: for each direction angle the
// top eigenvector of cos(t) A1 + sin(t) A2 realizes the support value, so the
// returned points trace the boundary counterclockwise.
inline std::vector<Vec> trace_boundary(const SymMatrix& A1,
                                       const SymMatrix& A2, int directions) {
  if (A1.dim() != A2.dim())
    throw InvalidInput("trace_boundary: dimension mismatch");
  if (A1.dim() < 2) throw InvalidInput("trace_boundary: dimension must be >= 2");
  if (directions < 8) throw InvalidInput("trace_boundary: need >= 8 directions");
  std::vector<Vec> pts;
  pts.reserve(directions);
  const SymMatrix* ops[2] = {&A1, &A2};
  for (int k = 0; k < directions; ++k) {
    const double t = 2.0 * 3.14159265358979323846 * k / directions;
    SymMatrix m = A1.scaled_by(std::cos(t));
    m.add_scaled(A2, std::sin(t));
    const Spectrum sp = eigendecompose(m);
    const Vec& u = sp.vectors.back();
    pts.push_back({ops[0]->quad(u), ops[1]->quad(u)});
  }
  return pts;
}

struct AttainOptions {
  int gd_iters = 80;
  int gn_iters = 100;
};

struct AttainResult {
  Vec x;
  double residual = 0.0;  // ||output(x) - target||_2 with the constraint met
};

// Local search for a domain point whose image is closest to `target`.
// Each start runs gradient descent with backtracking on ||r||^2 first and a
// damped Gauss-Newton polish after; the sphere constraint enters the residual
// as an extra row and the final iterate is renormalized before scoring.
inline AttainResult nearest_attainable(std::span<const QuadForm> forms,
                                       std::span<const double> target,
                                       bool on_sphere,
                                       std::span<const Vec> starts,
                                       const AttainOptions& opt = {}) {
  detail::check_tuple(forms);
  if (target.size() != forms.size())
    throw InvalidInput("nearest_attainable: target length mismatch");
  if (starts.empty()) throw InvalidInput("nearest_attainable: no starts");
  const std::size_t k = forms.size();

  auto residual = [&](const Vec& x) {
    Vec r(k + (on_sphere ? 1 : 0));
    for (std::size_t j = 0; j < k; ++j)
      r[j] = evaluate(forms[j], x) - target[j];
    if (on_sphere) r[k] = dot(x, x) - 1.0;
    return r;
  };
  auto jac = [&](const Vec& x) {
    std::vector<Vec> rows;
    rows.reserve(k + (on_sphere ? 1 : 0));
    for (std::size_t j = 0; j < k; ++j) rows.push_back(gradient(forms[j], x));
    if (on_sphere) rows.push_back(scaled(x, 2.0));
    return rows;
  };
  auto objective = [&](const Vec& x) {
    const Vec r = residual(x);
    return dot(r, r);
  };
  auto obj_grad = [&](const Vec& x) {
    const Vec r = residual(x);
    const std::vector<Vec> rows = jac(x);
    Vec g(x.size(), 0.0);
    for (std::size_t j = 0; j < r.size(); ++j) axpy(2.0 * r[j], rows[j], g);
    return g;
  };
  auto score = [&](Vec x) -> AttainResult {
    if (on_sphere) {
      const double nx = norm2(x);
      if (nx > 1e-12)
        for (double& v : x) v /= nx;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = evaluate(forms[j], x) - target[j];
      s += d * d;
    }
    return {std::move(x), std::sqrt(s)};
  };

  std::optional<AttainResult> best;
  for (const Vec& start : starts) {
    DescentOptions dopt;
    dopt.max_iters = opt.gd_iters;
    DescentResult gd = gradient_descent(objective, obj_grad, start, dopt);
    LeastSquaresResult gn =
        gauss_newton(residual, jac, std::move(gd.x), opt.gn_iters);
    AttainResult cand = score(std::move(gn.x));
    if (!best || cand.residual < best->residual) best = std::move(cand);
  }
  return *best;
}

struct ConvexityReport {
  double defect = 0.0;          // worst distance from a probe to the image
  double hull_area = 0.0;       // planar samples only
  std::vector<Vec> boundary;    // hull vertices, counterclockwise (planar)
  std::vector<Vec> violations;  // probe targets whose distance broke tolerance
};

namespace detail {

inline std::vector<Vec> convexity_starts(const RangeSample& sample,
                                         std::span<const QuadForm> forms,
                                         std::span<const double> target, int i,
                                         int j, bool on_sphere) {
  std::vector<Vec> starts;
  const Vec& gi = sample.generators[i];
  const Vec& gj = sample.generators[j];
  starts.push_back(gi);
  starts.push_back(gj);
  // Scan a blend path between the two generators and keep the best point;
  // for sphere samples the path is renormalized, for cones the sqrt blend
  // matches the quadratic scaling.
  Vec best_mix;
  double best_val = 0.0;
  for (int s = 1; s < 16; ++s) {
    const double t = s / 16.0;
    Vec mix = scaled(gi, std::sqrt(1.0 - t));
    axpy(std::sqrt(t), gj, mix);
    if (on_sphere) {
      const double nm = norm2(mix);
      if (nm < 1e-9) continue;
      for (double& v : mix) v /= nm;
    }
    double val = 0.0;
    for (std::size_t f = 0; f < forms.size(); ++f) {
      const double d = evaluate(forms[f], mix) - target[f];
      val += d * d;
    }
    if (best_mix.empty() || val < best_val) {
      best_mix = std::move(mix);
      best_val = val;
    }
  }
  if (!best_mix.empty()) starts.push_back(std::move(best_mix));
  // The endpoint generators can all sit in the wrong basin, so also start
  // from the sample points whose images are closest to the target.
  const std::size_t count = sample.points.size();
  std::vector<std::pair<double, int>> near;
  near.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    double val = 0.0;
    for (std::size_t f = 0; f < forms.size(); ++f) {
      const double d = sample.points[k][f] - target[f];
      val += d * d;
    }
    near.push_back({val, static_cast<int>(k)});
  }
  const std::size_t keep = std::min<std::size_t>(3, near.size());
  std::partial_sort(near.begin(), near.begin() + keep, near.end());
  for (std::size_t k = 0; k < keep; ++k)
    starts.push_back(sample.generators[near[k].second]);
  return starts;
}

}  // namespace detail

// Measures how far chords of the sampled image stray from attainability:
// random pairwise blends t*p + (1-t)*q are pushed back onto the image by
// local search, and the defect is the worst residual distance seen.
inline ConvexityReport convexity_defect(const RangeSample& sample,
                                        std::span<const QuadForm> forms,
                                        int probes, std::uint64_t seed) {
  detail::check_tuple(forms);
  if (sample.dim_out != static_cast<int>(forms.size()))
    throw InvalidInput("convexity_defect: sample/forms arity mismatch");
  if (sample.points.empty())
    throw InvalidInput("convexity_defect: empty sample");
  if (probes < 1) throw InvalidInput("convexity_defect: probes must be >= 1");
  const bool on_sphere = sample.kind == SampleKind::Sphere;
  const int count = static_cast<int>(sample.points.size());

  double point_scale = 0.0;
  for (const Vec& p : sample.points)
    point_scale = std::max(point_scale, norm_inf(p));
  const double violation_tol = 1e-6 * (1.0 + point_scale);
  // Rescue stages fire on an absolute stall threshold, not the reporting
  // tolerance: wide-scale samples inflate the latter past genuine stalls.
  const double rescue_tol = std::max(1e-8, 1e-12 * (1.0 + point_scale));

  ConvexityReport rep;
  Rng rng(seed);
  for (int probe = 0; probe < probes; ++probe) {
    const int i = rng.uniform_int(0, count - 1);
    const int j = rng.uniform_int(0, count - 1);
    const double t = std::clamp(rng.uniform(), 1e-6, 1.0 - 1e-6);
    Vec target = scaled(sample.points[i], t);
    axpy(1.0 - t, sample.points[j], target);
    const std::vector<Vec> starts =
        detail::convexity_starts(sample, forms, target, i, j, on_sphere);
    AttainResult res = nearest_attainable(forms, target, on_sphere, starts);
    // Wide multistart rescue: near image folds the deterministic starts can
    // all share one basin, so scatter fresh starts over the domain.
    if (res.residual > rescue_tol) {
      const int n_dom = forms[0].dim();
      const double ri = norm2(sample.generators[i]);
      const double rj = norm2(sample.generators[j]);
      std::vector<Vec> rescue;
      rescue.reserve(32);
      for (int r = 0; r < 32; ++r) {
        Vec u = rng.unit_vec(n_dom);
        if (!on_sphere) u = scaled(u, r % 2 ? ri : rj);
        rescue.push_back(std::move(u));
      }
      const AttainResult wide =
          nearest_attainable(forms, target, on_sphere, rescue);
      if (wide.residual < res.residual) res = wide;
    }
    // Continuation rescue when the one-shot starts fail to close: walk the
    // chord from an exactly attained endpoint toward the target, re-solving
    // from the previous preimage at each step. On a convex image every
    // intermediate target stays attainable next to the warm start; on a
    // nonconvex one this only sharpens the distance estimate.
    for (const int anchor : {i, j}) {
      if (res.residual <= rescue_tol) break;
      const std::size_t k = forms.size();
      const Vec& pa = sample.points[anchor];
      Vec x = sample.generators[anchor];
      constexpr int steps = 8;
      for (int s = 1; s <= steps; ++s) {
        Vec ts(k);
        for (std::size_t f = 0; f < k; ++f)
          ts[f] = pa[f] + (target[f] - pa[f]) * s / steps;
        const Vec warm_arr[1] = {x};
        x = nearest_attainable(forms, ts, on_sphere,
                               std::span<const Vec>(warm_arr, 1))
                .x;
      }
      double val = 0.0;
      for (std::size_t f = 0; f < k; ++f) {
        const double d = evaluate(forms[f], x) - target[f];
        val += d * d;
      }
      const double dist = std::sqrt(val);
      if (dist < res.residual) res = {std::move(x), dist};
    }
    rep.defect = std::max(rep.defect, res.residual);
    if (res.residual > violation_tol) rep.violations.push_back(target);
  }

  if (sample.dim_out == 2) {
    std::vector<Point2> pts;
    pts.reserve(sample.points.size());
    for (const Vec& p : sample.points) pts.push_back({p[0], p[1]});
    const std::vector<Point2> hull = convex_hull(pts);
    rep.hull_area = polygon_area(hull);
    for (const Point2& h : hull) rep.boundary.push_back({h.x, h.y});
  }
  return rep;
}

inline ConvexityReport convexity_defect(const RangeSample& sample,
                                        std::span<const SymMatrix> ops,
                                        int probes, std::uint64_t seed) {
  const std::vector<QuadForm> forms = lift_tuple(ops);
  return convexity_defect(sample, std::span<const QuadForm>(forms), probes,
                          seed);
}

struct ProbeResult {
  bool attained = false;
  double residual = 0.0;
  Vec x;
};

// Multistart search over the full domain space for a preimage of `target`.
// Attained when the best residual clears 1e-9 * (1 + ||target||).
inline ProbeResult closedness_probe(std::span<const QuadForm> forms,
                                    std::span<const double> target,
                                    int restarts, std::uint64_t seed,
                                    std::span<const Vec> extra_starts = {}) {
  detail::check_tuple(forms);
  if (target.size() != forms.size())
    throw InvalidInput("closedness_probe: target length mismatch");
  if (restarts < 1) throw InvalidInput("closedness_probe: restarts must be >= 1");
  const int n = forms[0].dim();

  double op_scale = 0.0;
  for (const QuadForm& f : forms)
    op_scale = std::max(op_scale, f.A.max_abs() + norm_inf(f.a));
  const double base =
      std::sqrt((1.0 + norm2(target)) / (1.0 + op_scale));

  Rng rng(seed);
  std::vector<Vec> starts(extra_starts.begin(), extra_starts.end());
  for (int i = 0; i < restarts; ++i) {
    Vec x = rng.unit_vec(n);
    const double r = base * std::pow(10.0, rng.uniform(-1.5, 1.5));
    for (double& v : x) v *= r;
    starts.push_back(std::move(x));
  }

  AttainOptions opt;
  opt.gd_iters = 500;
  opt.gn_iters = 150;
  AttainResult res = nearest_attainable(forms, target, false, starts, opt);
  ProbeResult out;
  out.residual = res.residual;
  out.x = std::move(res.x);
  out.attained = res.residual <= 1e-9 * (1.0 + norm2(target));
  return out;
}

inline ProbeResult closedness_probe(std::span<const SymMatrix> ops,
                                    std::span<const double> target,
                                    int restarts, std::uint64_t seed,
                                    std::span<const Vec> extra_starts = {}) {
  const std::vector<QuadForm> forms = lift_tuple(ops);
  return closedness_probe(std::span<const QuadForm>(forms), target, restarts,
                          seed, extra_starts);
}

struct ZeroInRangeResult {
  bool yes = false;
  Vec witness;       // unit vector when yes
  double min_norm = 0.0;  // best ||(f1, f2)||_2 seen over all starts
};

// Searches the unit sphere for a joint zero of both forms. The decision
// threshold is absolute: |f1| + |f2| <= 1e-9 at a unit witness.
inline ZeroInRangeResult zero_in_range(const SymMatrix& A1, const SymMatrix& A2,
                                       int restarts = 32,
                                       std::uint64_t seed = 0) {
  if (A1.dim() != A2.dim())
    throw InvalidInput("zero_in_range: dimension mismatch");
  const int n = A1.dim();
  const std::vector<QuadForm> forms = {QuadForm::homogeneous(A1),
                                       QuadForm::homogeneous(A2)};

  std::vector<Vec> starts;
  // Eigenvector mixes that zero one form exactly make strong starts.
  for (const SymMatrix* m : {&A1, &A2}) {
    const Spectrum sp = eigendecompose(*m);
    const double lmin = sp.values.front();
    const double lmax = sp.values.back();
    if (lmin < 0.0 && lmax > 0.0) {
      const double c2 = -lmin / (lmax - lmin);
      Vec x = scaled(sp.vectors.back(), std::sqrt(c2));
      axpy(std::sqrt(1.0 - c2), sp.vectors.front(), x);
      const double nx = norm2(x);
      if (nx > 1e-12) {
        for (double& v : x) v /= nx;
        starts.push_back(std::move(x));
      }
    }
  }
  Rng rng(seed);
  for (int i = 0; i < restarts; ++i) starts.push_back(rng.unit_vec(n));

  const Vec target = {0.0, 0.0};
  AttainOptions opt;
  opt.gd_iters = 200;
  opt.gn_iters = 150;
  const AttainResult res =
      nearest_attainable(forms, target, true, starts, opt);

  ZeroInRangeResult out;
  const double f1 = A1.quad(res.x);
  const double f2 = A2.quad(res.x);
  out.min_norm = std::sqrt(f1 * f1 + f2 * f2);
  out.yes = std::abs(f1) + std::abs(f2) <= 1e-9;
  out.witness = res.x;
  return out;
}

}  // namespace quadrange
