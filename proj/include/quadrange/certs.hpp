#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quadrange/geometry.hpp"
#include "quadrange/linalg.hpp"
#include "quadrange/lp.hpp"
#include "quadrange/numrange.hpp"
#include "quadrange/optimize.hpp"
#include "quadrange/pencil.hpp"
#include "quadrange/quadform.hpp"
#include "quadrange/rng.hpp"

namespace quadrange {

// Planar criterion F(z) = <Theta z, z> + <z, v> - t with Theta PSD.
struct QuadCriterion {
  SymMatrix Theta;
  Vec v;
  double t = 0.0;

  QuadCriterion(SymMatrix Theta_, Vec v_, double t_)
      : Theta(std::move(Theta_)), v(std::move(v_)), t(t_) {
    if (Theta.dim() != 2 || v.size() != 2)
      throw InvalidInput("QuadCriterion: planar data required");
    if (!all_finite(v) || !std::isfinite(t))
      throw InvalidInput("QuadCriterion: non-finite entry");
    const Definiteness d = classify_definiteness(Theta);
    if (d != Definiteness::PositiveDefinite &&
        d != Definiteness::PositiveSemidefinite)
      throw InvalidInput("QuadCriterion: Theta must be PSD");
  }

  QuadForm as_form() const { return QuadForm(Theta, v, -t); }

  double value(double z1, double z2) const {
    const Vec z = {z1, z2};
    return Theta.quad(z) + z1 * v[0] + z2 * v[1] - t;
  }

  double scale() const { return 1.0 + std::abs(t) + norm2(v); }
};

struct GlobalMin {
  bool bounded = false;
  double value = 0.0;  // set when bounded
  Vec minimizer;       // set when bounded
  Vec descent;         // direction of unbounded decrease otherwise
};

// Exact unconstrained minimum of a quadratic form. Finite iff A is PSD and
// the linear part lies in its range; otherwise a descent direction along
// which the form drops without bound is reported.
inline GlobalMin global_min_quadform(const QuadForm& phi) {
  const Spectrum sp = eigendecompose(phi.A);
  const double thr = 1e-12 * (1.0 + phi.A.max_abs());
  GlobalMin out;
  if (sp.values.front() < -thr) {
    out.descent = sp.vectors.front();
    return out;
  }
  const SymMatrix pinv = pseudoinverse(phi.A);
  const Vec w = pinv.apply(phi.a);
  const Vec resid = vsub(phi.A.apply(w), phi.a);
  if (norm2(resid) > 1e-8 * (1.0 + norm2(phi.a))) {
    // resid ~ -(null-space part of a), so f decreases along resid itself.
    Vec d = resid;
    const double nd = norm2(d);
    for (double& c : d) c /= nd;
    out.descent = std::move(d);
    return out;
  }
  out.bounded = true;
  out.value = phi.b - 0.25 * dot(w, phi.a);
  out.minimizer = scaled(w, -0.5);
  return out;
}

struct SLemmaCertificate {
  double alpha = 0.0;
  double beta = 0.0;
  Vec separator;  // (ahat, bhat, ghat): >= 0 on the image, <= 0 where F < 0
  double lambda = 0.0;
  double min_over_z = 0.0;
  double min_over_x = 0.0;
};

struct SlemmaVerification {
  bool verified = false;
  double min_over_z = 0.0;
  double min_over_x = 0.0;
  Vec refuting_x;  // set on refutation: the pair drives the expression < 0
  Vec refuting_z;
  double refuting_value = 0.0;
};

namespace detail {

inline double slemma_expression(const QuadCriterion& crit, double alpha,
                                double beta, const QuadForm& phi1,
                                const QuadForm& phi2, const Vec& x,
                                const Vec& z) {
  return crit.value(z[0], z[1]) + alpha * (evaluate(phi1, x) - z[0]) +
         beta * (evaluate(phi2, x) - z[1]);
}

}  // namespace detail

// Closed-form check of F(z) + alpha (phi1(x) - z1) + beta (phi2(x) - z2) >= 0:
// the expression separates into a z-part and an x-part, each minimized exactly.
inline SlemmaVerification verify_slemma_certificate(double alpha, double beta,
                                                    const QuadCriterion& crit,
                                                    const QuadForm& phi1,
                                                    const QuadForm& phi2) {
  if (phi1.dim() != phi2.dim())
    throw InvalidInput("verify_slemma_certificate: dimension mismatch");
  const GlobalMin mz = global_min_quadform(
      QuadForm(crit.Theta, {crit.v[0] - alpha, crit.v[1] - beta}, -crit.t));
  const GlobalMin mx = global_min_quadform(combine(alpha, phi1, beta, phi2));

  SlemmaVerification out;
  constexpr double inf = std::numeric_limits<double>::infinity();
  out.min_over_z = mz.bounded ? mz.value : -inf;
  out.min_over_x = mx.bounded ? mx.value : -inf;
  if (mz.bounded && mx.bounded &&
      mz.value + mx.value >= -1e-8 * crit.scale()) {
    out.verified = true;
    return out;
  }

  // Build a concrete violating pair by walking the descent directions far
  // enough; for the doubly-bounded case the two minimizers already violate.
  double s = 1.0;
  for (int it = 0; it < 300; ++it) {
    const Vec x = mx.bounded ? mx.minimizer : scaled(mx.descent, s);
    const Vec z = mz.bounded ? mz.minimizer : scaled(mz.descent, s);
    const double val =
        detail::slemma_expression(crit, alpha, beta, phi1, phi2, x, z);
    if (val < 0.0 || (mz.bounded && mx.bounded)) {
      out.refuting_x = x;
      out.refuting_z = z;
      out.refuting_value = val;
      return out;
    }
    s *= 2.0;
  }
  out.refuting_x = mx.bounded ? mx.minimizer : scaled(mx.descent, s);
  out.refuting_z = mz.bounded ? mz.minimizer : Vec(2, 0.0);
  out.refuting_value = detail::slemma_expression(crit, alpha, beta, phi1,
                                                 phi2, out.refuting_x,
                                                 out.refuting_z);
  return out;
}

// Global minimum of F(z) - lambda * (ahat z1 + bhat z2 + ghat).
inline GlobalMin farkas_value(const QuadCriterion& crit, const Vec& line,
                              double lambda) {
  if (line.size() != 3) throw InvalidInput("farkas_value: line must be (a,b,g)");
  return global_min_quadform(QuadForm(
      crit.Theta,
      {crit.v[0] - lambda * line[0], crit.v[1] - lambda * line[1]},
      -crit.t - lambda * line[2]));
}

inline bool farkas_lambda_valid(const QuadCriterion& crit, const Vec& line,
                                double lambda) {
  if (lambda < 0.0) return false;
  const GlobalMin g = farkas_value(crit, line, lambda);
  return g.bounded && g.value >= -1e-9 * crit.scale();
}

// Smallest lambda >= 0 making F - lambda * line nonnegative everywhere.
// The search splits on the null space of Theta: when the line's normal has a
// component there, lambda is pinned by the range condition; otherwise the
// valid set is an interval located by expanding golden search and bisection.
inline std::optional<double> smallest_farkas_lambda(const QuadCriterion& crit,
                                                    const Vec& line) {
  if (line.size() != 3)
    throw InvalidInput("smallest_farkas_lambda: line must be (a,b,g)");
  if (farkas_lambda_valid(crit, line, 0.0)) return 0.0;

  const Spectrum sp = eigendecompose(crit.Theta);
  const double rank_tol = 1e-10 * (1.0 + crit.Theta.max_abs());
  const Vec s2 = {line[0], line[1]};

  // Range conditions <v - lambda*s, u> = 0 over the null basis.
  std::optional<double> pinned;
  for (std::size_t i = 0; i < sp.values.size(); ++i) {
    if (std::abs(sp.values[i]) > rank_tol) continue;
    const Vec& u = sp.vectors[i];
    const double su = dot(s2, u);
    const double vu = dot(crit.v, u);
    if (std::abs(su) > 1e-8) {
      const double cand = vu / su;
      if (pinned && std::abs(*pinned - cand) > 1e-6 * (1.0 + std::abs(cand)))
        return std::nullopt;  // inconsistent constraints
      pinned = cand;
    } else if (std::abs(vu) > 1e-8) {
      return std::nullopt;  // condition unsatisfiable for every lambda
    }
  }
  if (pinned) {
    double lam = *pinned;
    if (lam < 0.0 && lam > -1e-12) lam = 0.0;
    if (farkas_lambda_valid(crit, line, lam)) return lam;
    return std::nullopt;
  }

  auto g = [&](double lam) {
    const GlobalMin gm = farkas_value(crit, line, lam);
    return gm.bounded ? gm.value : -std::numeric_limits<double>::infinity();
  };
  const double tol_f = -1e-9 * crit.scale();
  for (double cap = 1.0; cap <= 1.1e12; cap *= 2.0) {
    const auto peak = golden_max(g, 0.0, cap, 80);
    if (peak.second < tol_f) continue;
    double lo = 0.0, hi = peak.first;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (farkas_lambda_valid(crit, line, mid))
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  }
  return std::nullopt;
}

enum class SLemmaKind { Certificate, Counterexample, Inconclusive };

struct SLemmaOutcome {
  SLemmaKind kind = SLemmaKind::Inconclusive;
  std::optional<SLemmaCertificate> certificate;
  Vec counterexample_x;
  double counterexample_value = 0.0;
  std::string evidence;
};

namespace detail {

struct SeparationLp {
  bool found = false;
  Vec line;       // (ahat, bhat, ghat) in original coordinates, unit normal
  double margin = 0.0;
};

// Strictly separate the image cloud (>= side) from the negative-F cloud
// (<= side) with a maximum-margin line, after reducing both clouds to their
// hulls and normalizing coordinates.
inline SeparationLp separate_clouds(const std::vector<Point2>& image_pts,
                                    const std::vector<Point2>& neg_pts) {
  SeparationLp out;
  if (image_pts.empty() || neg_pts.empty()) return out;
  const std::vector<Point2> hull_d = convex_hull(image_pts);
  const std::vector<Point2> hull_n = convex_hull(neg_pts);

  double mx = 0.0;
  for (const Point2& p : hull_d)
    mx = std::max({mx, std::abs(p.x), std::abs(p.y)});
  for (const Point2& p : hull_n)
    mx = std::max({mx, std::abs(p.x), std::abs(p.y)});
  const double cs = 1.0 / (1.0 + mx);

  // Variables (ahat, bhat, ghat, m), maximize m.
  std::vector<Vec> rows;
  Vec rhs;
  for (const Point2& p : hull_d) {
    rows.push_back({-p.x * cs, -p.y * cs, -1.0, 1.0});
    rhs.push_back(0.0);
  }
  for (const Point2& p : hull_n) {
    rows.push_back({p.x * cs, p.y * cs, 1.0, 1.0});
    rhs.push_back(0.0);
  }
  for (int j = 0; j < 2; ++j) {
    Vec up(4, 0.0), dn(4, 0.0);
    up[j] = 1.0;
    dn[j] = -1.0;
    rows.push_back(up);
    rhs.push_back(1.0);
    rows.push_back(dn);
    rhs.push_back(1.0);
  }
  {
    Vec up(4, 0.0), dn(4, 0.0);
    up[2] = 1.0;
    dn[2] = -1.0;
    rows.push_back(up);
    rhs.push_back(10.0);
    rows.push_back(dn);
    rhs.push_back(10.0);
    Vec mcap(4, 0.0);
    mcap[3] = 1.0;
    rows.push_back(mcap);
    rhs.push_back(10.0);
  }
  const LpResult lp = solve_lp_max(rows, rhs, {0.0, 0.0, 0.0, 1.0});
  if (lp.status != LpStatus::Optimal || lp.value <= 1e-7) return out;

  // Unscale: the line was fit to cs-scaled points.
  Vec l = {lp.x[0] * cs, lp.x[1] * cs, lp.x[2]};
  const double nl = std::hypot(l[0], l[1]);
  if (nl < 1e-14) return out;
  for (double& c : l) c /= nl;
  out.found = true;
  out.line = std::move(l);
  out.margin = lp.value;
  return out;
}

}  // namespace detail

// Searches for S-lemma multipliers in phases: a trivial check when F is
// globally nonnegative, a counterexample scan over the sampled image, a
// max-margin separation LP between the image and the F-negative region, and
// a Farkas multiplier step; every candidate is verified in closed form.
inline SLemmaOutcome solve_slemma(const QuadCriterion& crit,
                                  const QuadForm& phi1, const QuadForm& phi2,
                                  int samples, std::uint64_t seed) {
  if (phi1.dim() != phi2.dim())
    throw InvalidInput("solve_slemma: dimension mismatch");
  if (samples < 16) throw InvalidInput("solve_slemma: need >= 16 samples");
  if (!find_pd_combination(phi1.A, phi2.A).certificate)
    throw HypothesisUnmet("solve_slemma: no PD combination of the parts");
  const double scale = crit.scale();

  auto certify = [&](double alpha, double beta, Vec separator,
                     double lambda) -> std::optional<SLemmaOutcome> {
    const SlemmaVerification ver =
        verify_slemma_certificate(alpha, beta, crit, phi1, phi2);
    if (!ver.verified) return std::nullopt;
    SLemmaOutcome out;
    out.kind = SLemmaKind::Certificate;
    out.certificate = SLemmaCertificate{alpha,          beta,
                                        std::move(separator), lambda,
                                        ver.min_over_z, ver.min_over_x};
    return out;
  };

  // Trivial case: F >= 0 on all of R^2, so zero multipliers work.
  const GlobalMin mf = global_min_quadform(crit.as_form());
  if (mf.bounded && mf.value >= -1e-8 * scale) {
    if (auto out = certify(0.0, 0.0, {0.0, 0.0, 0.0}, 0.0)) return *out;
  }

  // Sample the image and push down F on it by multistart descent.
  const std::vector<QuadForm> forms = {phi1, phi2};
  const RangeSample ds = sample_range(std::span<const QuadForm>(forms),
                                      SampleKind::FullSpace, samples, seed);
  auto f_on_image = [&](const Vec& x) {
    const Vec z = evaluate_tuple(forms, x);
    return crit.value(z[0], z[1]);
  };
  auto f_grad = [&](const Vec& x) {
    const Vec z = evaluate_tuple(forms, x);
    const double d1 = 2.0 * (crit.Theta(0, 0) * z[0] + crit.Theta(0, 1) * z[1]) +
                      crit.v[0];
    const double d2 = 2.0 * (crit.Theta(1, 0) * z[0] + crit.Theta(1, 1) * z[1]) +
                      crit.v[1];
    Vec g = gradient(phi1, x);
    for (double& c : g) c *= d1;
    axpy(d2, gradient(phi2, x), g);
    return g;
  };

  std::vector<std::size_t> order(ds.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return crit.value(ds.points[a][0], ds.points[a][1]) <
           crit.value(ds.points[b][0], ds.points[b][1]);
  });

  Vec best_x;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<Point2> probe_pts;
  DescentOptions dopt;
  dopt.max_iters = 300;
  for (std::size_t k = 0; k < std::min<std::size_t>(10, order.size()); ++k) {
    const DescentResult dr =
        gradient_descent(f_on_image, f_grad, ds.generators[order[k]], dopt);
    const double val = f_on_image(dr.x);
    const Vec z = evaluate_tuple(forms, dr.x);
    probe_pts.push_back({z[0], z[1]});
    if (val < best_f) {
      best_f = val;
      best_x = dr.x;
    }
  }
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    const double val = crit.value(ds.points[i][0], ds.points[i][1]);
    if (val < best_f) {
      best_f = val;
      best_x = ds.generators[i];
    }
  }
  if (best_f < -1e-6 * scale) {
    SLemmaOutcome out;
    out.kind = SLemmaKind::Counterexample;
    out.counterexample_x = best_x;
    out.counterexample_value = best_f;
    out.evidence = "criterion negative at a sampled image point";
    return out;
  }

  // Degenerate criterion: with Theta ~ 0 the multipliers are forced to v.
  const double theta_scale = crit.Theta.max_abs();
  if (theta_scale <= 1e-12 * scale) {
    const double nv = norm2(crit.v);
    if (nv > 1e-12 * scale) {
      const Vec vhat = {crit.v[0] / nv, crit.v[1] / nv};
      const double ghat = -crit.t / nv;
      if (auto out = certify(crit.v[0], crit.v[1],
                             {vhat[0], vhat[1], ghat}, nv))
        return *out;
    }
    SLemmaOutcome out;
    out.evidence = "linear criterion did not verify against the image";
    return out;
  }

  // Sample the F < 0 region by shooting rays from an interior point.
  Vec zc;
  if (mf.bounded) {
    zc = mf.minimizer;
  } else {
    zc = {0.0, 0.0};
    double step = 1.0;
    for (int it = 0; it < 200 && crit.value(zc[0], zc[1]) > -1.0; ++it) {
      axpy(step, mf.descent, zc);
      step *= 2.0;
    }
  }
  const double fc = crit.value(zc[0], zc[1]);
  std::vector<Point2> neg_pts;
  if (fc < 0.0) {
    neg_pts.push_back({zc[0], zc[1]});
    const double cap = 1e4 * (1.0 + norm2(zc)) * scale;
    const int rays = 256;
    for (int r = 0; r < rays; ++r) {
      const double ang = 2.0 * 3.14159265358979323846 * r / rays;
      const Vec d = {std::cos(ang), std::sin(ang)};
      const double qa = crit.Theta.quad(d);
      const double qb = 2.0 * (crit.Theta(0, 0) * zc[0] * d[0] +
                               crit.Theta(0, 1) * (zc[0] * d[1] + zc[1] * d[0]) +
                               crit.Theta(1, 1) * zc[1] * d[1]) +
                        crit.v[0] * d[0] + crit.v[1] * d[1];
      double smax;
      if (qa > 1e-14) {
        const double disc = qb * qb - 4.0 * qa * fc;
        smax = (-qb + std::sqrt(std::max(disc, 0.0))) / (2.0 * qa);
      } else if (qb > 1e-14) {
        smax = -fc / qb;
      } else {
        smax = cap;
      }
      smax = std::min(std::max(smax, 0.0), cap) * 0.999;
      neg_pts.push_back({zc[0] + smax * d[0], zc[1] + smax * d[1]});
    }
  }

  // Separation attempts over a trim ladder: nearby image points first, the
  // whole cloud last. Far-flung full-space samples otherwise squash the LP.
  std::string why = "separation found no strict margin";
  for (const double trim : {1e2 * scale, 1e4 * scale,
                            std::numeric_limits<double>::infinity()}) {
    std::vector<Point2> image_pts = probe_pts;
    for (const Vec& p : ds.points) {
      if (std::hypot(p[0], p[1]) > trim) continue;
      image_pts.push_back({p[0], p[1]});
    }
    std::erase_if(image_pts, [&](const Point2& p) {
      return crit.value(p.x, p.y) < 0.0;
    });
    const detail::SeparationLp sep =
        detail::separate_clouds(image_pts, neg_pts);
    if (!sep.found) continue;
    const std::optional<double> lam = smallest_farkas_lambda(crit, sep.line);
    if (!lam) {
      why = "no Farkas multiplier for the separating line";
      continue;
    }
    if (auto out = certify(*lam * sep.line[0], *lam * sep.line[1], sep.line,
                           *lam))
      return *out;
    why = "separating line produced an unverifiable certificate";
  }

  SLemmaOutcome out;
  out.kind = SLemmaKind::Inconclusive;
  out.evidence = why;
  return out;
}

struct SignClauseEntry {
  std::string clause;
  bool applies = false;
  char variable = ' ';  // 'a' or 'b'
  double value = 0.0;
  bool satisfied = true;  // vacuously true when the clause does not apply
};

struct SignClauseReport {
  std::vector<SignClauseEntry> entries;
  bool all_satisfied = true;
};

// Hypothesis-driven sign requirements on verified multipliers: an unbounded
// first form with a definite second forces beta >= 0 (and symmetrically),
// and the degenerate-Theta patterns force alpha >= 0.
inline SignClauseReport check_sign_clauses(const SLemmaCertificate& cert,
                                           const QuadForm& phi1,
                                           const QuadForm& phi2,
                                           const QuadCriterion& crit) {
  SignClauseReport rep;
  const double tol1 = 1e-12 * (1.0 + phi1.A.max_abs());
  const double tol2 = 1e-12 * (1.0 + phi2.A.max_abs());
  const bool a1_unbounded = bounded_below_constant(phi1.A) < -tol1;
  const bool a2_unbounded = bounded_below_constant(phi2.A) < -tol2;
  const bool a1_pd =
      classify_definiteness(phi1.A) == Definiteness::PositiveDefinite;
  const bool a2_pd =
      classify_definiteness(phi2.A) == Definiteness::PositiveDefinite;

  auto add = [&](std::string name, bool applies, char var, double val) {
    SignClauseEntry e;
    e.clause = std::move(name);
    e.applies = applies;
    e.variable = var;
    e.value = val;
    e.satisfied = !applies || val >= -1e-10;
    rep.entries.push_back(e);
    rep.all_satisfied = rep.all_satisfied && rep.entries.back().satisfied;
  };

  add("first form unbounded, second definite: beta sign",
      a1_unbounded && a2_pd, 'b', cert.beta);
  add("second form unbounded, first definite: alpha sign",
      a2_unbounded && a1_pd, 'a', cert.alpha);

  const double tth = 1e-10 * (1.0 + crit.Theta.max_abs());
  const bool corner_low = std::abs(crit.Theta(0, 0)) <= tth &&
                          std::abs(crit.Theta(0, 1)) <= tth &&
                          crit.Theta(1, 1) > tth;
  const bool corner_high = std::abs(crit.Theta(1, 1)) <= tth &&
                           std::abs(crit.Theta(0, 1)) <= tth &&
                           crit.Theta(0, 0) > tth;
  add("criterion curved in z2 only with v1 > 0: alpha sign",
      corner_low && crit.v[0] > 0.0, 'a', cert.alpha);
  add("criterion curved in z1 only with v2 < 0: alpha sign",
      corner_high && crit.v[1] < 0.0, 'a', cert.alpha);
  return rep;
}

struct SProcCertificate {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double slack_operator = 0.0;  // lambda_min(tau1 A1 + tau2 A2 - A0)
  double slack_scalar = 0.0;    // alpha0 - tau1 alpha1 - tau2 alpha2
  bool tau2_sign_unrestricted = false;
};

struct SProcOutcome {
  std::optional<SProcCertificate> certificate;
  double best_tau1 = 0.0;
  double best_tau2 = 0.0;
  double best_value = 0.0;  // normalized max-min value at the best multiplier
  bool tau2_sign_unrestricted = false;
};

namespace detail {

inline SProcOutcome sproc_search(const SymMatrix& A0, const SymMatrix& A1,
                                 const SymMatrix& A2, double alpha0,
                                 double alpha1, double alpha2,
                                 bool tau2_free) {
  const double scale_op =
      1.0 + std::max({A0.max_abs(), A1.max_abs(), A2.max_abs()});
  const double scale_sc =
      1.0 + std::abs(alpha0) + std::abs(alpha1) + std::abs(alpha2);

  auto raw_op = [&](double t1, double t2) {
    SymMatrix m = A1.scaled_by(t1);
    m.add_scaled(A2, t2);
    m.add_scaled(A0, -1.0);
    return eigendecompose(m).values.front();
  };
  auto m_val = [&](double t1, double t2) {
    return std::min(raw_op(t1, t2) / scale_op,
                    (alpha0 - t1 * alpha1 - t2 * alpha2) / scale_sc);
  };

  double best_v = -std::numeric_limits<double>::infinity();
  double bt1 = 0.0, bt2 = 0.0, best_space = 1.0;
  for (int k = 0; k <= 5; ++k) {
    const double size = std::pow(2.0, k);
    for (int i = 0; i < 64; ++i) {
      const double t1 = size * i / 63.0;
      for (int j = 0; j < 64; ++j) {
        const double t2 =
            tau2_free ? -size + 2.0 * size * j / 63.0 : size * j / 63.0;
        const double val = m_val(t1, t2);
        if (val > best_v) {
          best_v = val;
          bt1 = t1;
          bt2 = t2;
          best_space = size / 63.0;
        }
      }
    }
  }

  // Simplex refinement with a penalty that keeps tau in its orthant; the
  // max-min surface is concave but kinked, so no line-search method fits.
  auto penalized = [&](const Vec& t) {
    double pen = std::max(0.0, -t[0]);
    if (!tau2_free) pen += std::max(0.0, -t[1]);
    const double c1 = std::max(t[0], 0.0);
    const double c2 = tau2_free ? t[1] : std::max(t[1], 0.0);
    return m_val(c1, c2) - 1e6 * pen;
  };
  const auto nm =
      nelder_mead_max(penalized, {bt1, bt2}, std::max(best_space, 1e-3), 200);
  const double r1 = std::max(nm.first[0], 0.0);
  const double r2 = tau2_free ? nm.first[1] : std::max(nm.first[1], 0.0);
  if (m_val(r1, r2) > best_v) {
    best_v = m_val(r1, r2);
    bt1 = r1;
    bt2 = r2;
  }

  SProcOutcome out;
  out.best_tau1 = bt1;
  out.best_tau2 = bt2;
  out.best_value = best_v;
  out.tau2_sign_unrestricted = tau2_free;
  if (best_v >= -1e-8) {
    SProcCertificate cert;
    cert.tau1 = bt1;
    cert.tau2 = bt2;
    cert.slack_operator = raw_op(bt1, bt2);
    cert.slack_scalar = alpha0 - bt1 * alpha1 - bt2 * alpha2;
    cert.tau2_sign_unrestricted = tau2_free;
    out.certificate = cert;
  }
  return out;
}

inline void sproc_validate(const SymMatrix& A0, const SymMatrix& A1,
                           const SymMatrix& A2, const Vec& slater) {
  if (A0.dim() != A1.dim() || A0.dim() != A2.dim())
    throw InvalidInput("s-procedure: dimension mismatch");
  if (static_cast<int>(slater.size()) != A0.dim())
    throw InvalidInput("s-procedure: Slater point has wrong dimension");
  if (!find_pd_combination(A1, A2).certificate)
    throw HypothesisUnmet("s-procedure: no PD combination of A1, A2");
}

}  // namespace detail

// Multiplier search for: f1 <= alpha1 and f2 <= alpha2 imply f0 <= alpha0,
// with homogeneous forms f_i = <A_i x, x>. Maximizes the normalized min of
// the operator slack and the scalar slack over tau >= 0.
inline SProcOutcome solve_sprocedure(const SymMatrix& A0, const SymMatrix& A1,
                                     const SymMatrix& A2, double alpha0,
                                     double alpha1, double alpha2,
                                     const Vec& slater) {
  detail::sproc_validate(A0, A1, A2, slater);
  if (!(A1.quad(slater) < alpha1 - 1e-9) ||
      !(A2.quad(slater) < alpha2 - 1e-9))
    throw HypothesisUnmet("s-procedure: Slater point not strictly feasible");
  return detail::sproc_search(A0, A1, A2, alpha0, alpha1, alpha2, false);
}

// Equality variant: constraint two reads f2(x) == alpha2, so tau2 ranges
// over all of R. Requires alpha2 != 0 and a Slater point on the surface.
inline SProcOutcome solve_sprocedure_eq(const SymMatrix& A0,
                                        const SymMatrix& A1,
                                        const SymMatrix& A2, double alpha0,
                                        double alpha1, double alpha2,
                                        const Vec& slater) {
  detail::sproc_validate(A0, A1, A2, slater);
  if (alpha2 == 0.0)
    throw HypothesisUnmet("s-procedure eq: alpha2 must be nonzero");
  if (!(A1.quad(slater) < alpha1 - 1e-9))
    throw HypothesisUnmet("s-procedure eq: Slater point not strictly feasible");
  if (std::abs(A2.quad(slater) - alpha2) > 1e-9)
    throw HypothesisUnmet("s-procedure eq: Slater point off the surface");
  return detail::sproc_search(A0, A1, A2, alpha0, alpha1, alpha2, true);
}

}  // namespace quadrange
