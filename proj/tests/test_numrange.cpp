#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "quadrange/numrange.hpp"
#include "test_util.hpp"

using namespace quadrange;

namespace {

// Planar pair whose joint sphere image is exactly the unit circle:
// x -> (x1^2 - x2^2, 2 x1 x2) maps unit vectors to unit vectors.
std::vector<SymMatrix> circle_pair() {
  SymMatrix a1 = SymMatrix::diagonal({1.0, -1.0});
  SymMatrix a2 = SymMatrix::zero(2);
  a2.set(0, 1, 1.0);
  return {a1, a2};
}

// Truncation of the vanishing-diagonal pair: A0 = diag(1/k),
// A1 = diag((1/k)(1 + 1/k)), k = 1..n.
std::vector<SymMatrix> vanishing_pair(int n) {
  Vec d0(n), d1(n);
  for (int k = 1; k <= n; ++k) {
    d0[k - 1] = 1.0 / k;
    d1[k - 1] = (1.0 / k) * (1.0 + 1.0 / k);
  }
  return {SymMatrix::diagonal(d0), SymMatrix::diagonal(d1)};
}

}  // namespace

TEST_CASE("sample_range generators reproduce their points") {
  Rng seed_rng(7);
  std::vector<SymMatrix> ops = {testutil::random_sym(seed_rng, 4, 1.0),
                                testutil::random_sym(seed_rng, 4, 1.0)};
  const std::vector<QuadForm> forms = lift_tuple(ops);

  SECTION("sphere: unit generators, exact recompute") {
    RangeSample s = sample_range(std::span<const SymMatrix>(ops),
                                 SampleKind::Sphere, 50, 11);
    REQUIRE(s.points.size() == 50);
    REQUIRE(s.dim_out == 2);
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      REQUIRE(norm2(s.generators[i]) == Catch::Approx(1.0).margin(1e-12));
      const Vec again = evaluate_tuple(forms, s.generators[i]);
      REQUIRE(again[0] == s.points[i][0]);
      REQUIRE(again[1] == s.points[i][1]);
    }
  }

  SECTION("full space: radii span decades within bounds") {
    RangeSample s = sample_range(std::span<const SymMatrix>(ops),
                                 SampleKind::FullSpace, 300, 11);
    double rmin = 1e300, rmax = 0.0;
    for (const Vec& g : s.generators) {
      const double r = norm2(g);
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    REQUIRE(rmin >= 1e-3);
    REQUIRE(rmax <= 1e3);
    REQUIRE(rmin < 1e-1);
    REQUIRE(rmax > 1e1);
  }

  SECTION("same seed gives bitwise identical samples") {
    RangeSample a = sample_range(std::span<const SymMatrix>(ops),
                                 SampleKind::Sphere, 20, 5);
    RangeSample b = sample_range(std::span<const SymMatrix>(ops),
                                 SampleKind::Sphere, 20, 5);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      REQUIRE(a.points[i] == b.points[i]);
      REQUIRE(a.generators[i] == b.generators[i]);
    }
  }

  SECTION("input validation") {
    REQUIRE_THROWS_AS(sample_range(std::span<const SymMatrix>(ops),
                                   SampleKind::Sphere, 0, 1),
                      InvalidInput);
    std::vector<SymMatrix> mismatched = {SymMatrix::identity(3),
                                         SymMatrix::identity(4)};
    REQUIRE_THROWS_AS(sample_range(std::span<const SymMatrix>(mismatched),
                                   SampleKind::Sphere, 5, 1),
                      InvalidInput);
  }
}

TEST_CASE("trace_boundary follows the support function") {
  SECTION("circle pair lands on the unit circle") {
    const std::vector<SymMatrix> ops = circle_pair();
    const std::vector<Vec> pts = trace_boundary(ops[0], ops[1], 64);
    REQUIRE(pts.size() == 64);
    for (const Vec& p : pts) {
      REQUIRE(std::hypot(p[0], p[1]) == Catch::Approx(1.0).margin(1e-10));
    }
  }

  SECTION("each traced point maximizes its own direction") {
    Rng rng(3);
    const SymMatrix a1 = testutil::random_sym(rng, 5, 1.0);
    const SymMatrix a2 = testutil::random_sym(rng, 5, 1.0);
    const int dirs = 32;
    const std::vector<Vec> pts = trace_boundary(a1, a2, dirs);
    for (int k = 0; k < dirs; ++k) {
      const double t = 2.0 * 3.14159265358979323846 * k / dirs;
      const double cx = std::cos(t), cy = std::sin(t);
      const double self = cx * pts[k][0] + cy * pts[k][1];
      for (const Vec& q : pts)
        REQUIRE(self >= cx * q[0] + cy * q[1] - 1e-8);
    }
  }

  SECTION("validation") {
    const std::vector<SymMatrix> ops = circle_pair();
    REQUIRE_THROWS_AS(trace_boundary(ops[0], ops[1], 4), InvalidInput);
    REQUIRE_THROWS_AS(trace_boundary(ops[0], SymMatrix::identity(3), 16),
                      InvalidInput);
  }
}

TEST_CASE("nearest_attainable against the circle image") {
  const std::vector<SymMatrix> ops = circle_pair();
  const std::vector<QuadForm> forms = lift_tuple(ops);
  Rng rng(17);
  std::vector<Vec> starts;
  for (int i = 0; i < 8; ++i) starts.push_back(rng.unit_vec(2));

  SECTION("point on the circle is hit exactly") {
    const double s = std::sqrt(0.5);
    const Vec target = {s, s};
    const AttainResult res = nearest_attainable(
        std::span<const QuadForm>(forms), target, true, starts);
    REQUIRE(res.residual <= 1e-10);
    REQUIRE(norm2(res.x) == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("outside point reports the circle distance") {
    const Vec target = {2.0, 0.0};
    const AttainResult res = nearest_attainable(
        std::span<const QuadForm>(forms), target, true, starts);
    REQUIRE(res.residual == Catch::Approx(1.0).margin(1e-8));
  }

  SECTION("inside point reports the circle distance") {
    const Vec target = {0.25, 0.0};
    const AttainResult res = nearest_attainable(
        std::span<const QuadForm>(forms), target, true, starts);
    REQUIRE(res.residual == Catch::Approx(0.75).margin(1e-8));
  }
}

TEST_CASE("convexity_defect sees Brickman convexity at dim >= 3") {
  Rng rng(23);
  std::vector<SymMatrix> ops = {testutil::random_sym(rng, 5, 1.0),
                                testutil::random_sym(rng, 5, 1.0)};
  RangeSample s = sample_range(std::span<const SymMatrix>(ops),
                               SampleKind::Sphere, 60, 29);
  ConvexityReport rep =
      convexity_defect(s, std::span<const SymMatrix>(ops), 40, 31);
  REQUIRE(rep.defect <= 1e-4);
  REQUIRE(rep.violations.empty());
  REQUIRE(rep.hull_area > 0.0);
}

TEST_CASE("convexity_defect flags the planar circle image") {
  // Chord midpoints of the circle lie well inside it, so probes cannot be
  // attained and the defect stays macroscopic.
  const std::vector<SymMatrix> ops = circle_pair();
  RangeSample s = sample_range(std::span<const SymMatrix>(ops),
                               SampleKind::Sphere, 200, 41);
  ConvexityReport rep =
      convexity_defect(s, std::span<const SymMatrix>(ops), 60, 43);
  REQUIRE(rep.defect > 0.05);
  REQUIRE_FALSE(rep.violations.empty());
  REQUIRE(rep.hull_area == Catch::Approx(3.14159265).margin(0.2));
  REQUIRE(rep.boundary.size() >= 8);
}

TEST_CASE("convexity_defect is deterministic for a fixed seed") {
  Rng rng(5);
  std::vector<SymMatrix> ops = {testutil::random_sym(rng, 3, 1.0),
                                testutil::random_sym(rng, 3, 1.0)};
  RangeSample s = sample_range(std::span<const SymMatrix>(ops),
                               SampleKind::Sphere, 30, 7);
  ConvexityReport a =
      convexity_defect(s, std::span<const SymMatrix>(ops), 20, 9);
  ConvexityReport b =
      convexity_defect(s, std::span<const SymMatrix>(ops), 20, 9);
  REQUIRE(a.defect == b.defect);
  REQUIRE(a.hull_area == b.hull_area);
}

TEST_CASE("closedness_probe on the vanishing-diagonal truncation") {
  const int n = 5;
  const double h = 1.0 / n;
  const std::vector<SymMatrix> ops = vanishing_pair(n);

  SECTION("attainable corner point is found") {
    // x = sqrt(n) e_n maps exactly to (1, 1 + 1/n).
    const Vec target = {1.0, 1.0 + h};
    ProbeResult res = closedness_probe(std::span<const SymMatrix>(ops),
                                       target, 32, 13);
    REQUIRE(res.attained);
    REQUIRE(res.residual <= 1e-9 * (1.0 + norm2(target)));
  }

  SECTION("gap target matches the closed-form distance") {
    // Nearest image point to (1,1) sits on the e_n ray at
    // u* = (2+h)/(2+2h+h^2); the distance is h/sqrt(2+2h+h^2).
    const double denom = 2.0 + 2.0 * h + h * h;
    const double dist = h / std::sqrt(denom);
    const double ustar = (2.0 + h) / denom;
    Vec witness(n, 0.0);
    witness[n - 1] = std::sqrt(ustar * n);
    const std::vector<Vec> extra = {witness};

    const Vec target = {1.0, 1.0};
    ProbeResult res = closedness_probe(std::span<const SymMatrix>(ops),
                                       target, 32, 13, extra);
    REQUIRE_FALSE(res.attained);
    REQUIRE(res.residual >= dist - 1e-9);
    REQUIRE(res.residual <= dist + 1e-7);
  }

  SECTION("residual shrinks as the truncation grows") {
    const Vec target = {1.0, 1.0};
    double prev = 1e300;
    for (int m : {4, 8, 16}) {
      const std::vector<SymMatrix> opm = vanishing_pair(m);
      Vec witness(m, 0.0);
      const double hm = 1.0 / m;
      const double um = (2.0 + hm) / (2.0 + 2.0 * hm + hm * hm);
      witness[m - 1] = std::sqrt(um * m);
      const std::vector<Vec> extra = {witness};
      ProbeResult res = closedness_probe(std::span<const SymMatrix>(opm),
                                         target, 24, 13, extra);
      REQUIRE(res.residual < prev);
      REQUIRE(res.residual > 0.0);
      prev = res.residual;
    }
  }
}

TEST_CASE("full-space image of homogeneous forms is a cone") {
  Rng rng(37);
  std::vector<SymMatrix> ops = {testutil::random_sym(rng, 4, 1.0),
                                testutil::random_sym(rng, 4, 1.0)};
  const std::vector<QuadForm> forms = lift_tuple(ops);
  RangeSample s = sample_range(std::span<const SymMatrix>(ops),
                               SampleKind::FullSpace, 10, 39);
  for (double t : {0.5, 2.0, 7.0}) {
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const Vec target = scaled(s.points[i], t);
      const std::vector<Vec> starts = {scaled(s.generators[i], std::sqrt(t))};
      const AttainResult res = nearest_attainable(
          std::span<const QuadForm>(forms), target, false, starts);
      REQUIRE(res.residual <= 1e-9 * (1.0 + norm2(target)));
    }
  }
}

TEST_CASE("zero_in_range finds and rejects joint zeros") {
  SECTION("constructed joint zero is detected") {
    // (1,1,1)/sqrt(3) annihilates both diag(1,-1,0) and diag(0,1,-1).
    const SymMatrix a1 = SymMatrix::diagonal({1.0, -1.0, 0.0});
    const SymMatrix a2 = SymMatrix::diagonal({0.0, 1.0, -1.0});
    ZeroInRangeResult res = zero_in_range(a1, a2, 32, 47);
    REQUIRE(res.yes);
    REQUIRE(norm2(res.witness) == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(std::abs(a1.quad(res.witness)) +
                std::abs(a2.quad(res.witness)) <=
            1e-9);
  }

  SECTION("definite first form forces no") {
    const SymMatrix a1 = SymMatrix::identity(3);
    const SymMatrix a2 = SymMatrix::diagonal({1.0, -1.0, 0.0});
    ZeroInRangeResult res = zero_in_range(a1, a2, 32, 53);
    REQUIRE_FALSE(res.yes);
    REQUIRE(res.min_norm >= 0.99);
    REQUIRE(res.min_norm <= 1.01);
  }
}

TEST_CASE("convexity_defect closes fold-heavy planar probes at n = 3") {
  // Small dimensions put image folds near most chords; the endpoint starts
  // then share a basin and only the scattered rescue reaches the target.
  Rng rng(101);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<SymMatrix> ops = {testutil::random_sym(rng, 3, 1.0),
                                  testutil::random_sym(rng, 3, 1.0)};
    RangeSample s = sample_range(std::span<const SymMatrix>(ops),
                                 SampleKind::Sphere, 60, 1000 + rep);
    ConvexityReport rep_out =
        convexity_defect(s, std::span<const SymMatrix>(ops), 40, 2000 + rep);
    REQUIRE(rep_out.defect <= 1e-8);
  }
}

TEST_CASE("convexity_defect stays at solver precision across sample scales") {
  // Full-space samples span six decades, so the reporting tolerance is much
  // looser than a genuine stall; the rescue gate must not hide behind it.
  Rng rng(606);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<SymMatrix> ops = {testutil::random_sym(rng, 3, 0.8),
                                  testutil::random_psd(rng, 3, 0.5),
                                  testutil::random_sym(rng, 3, 0.8)};
    RangeSample s = sample_range(std::span<const SymMatrix>(ops),
                                 SampleKind::FullSpace, 100, 6000 + rep);
    ConvexityReport rep_out =
        convexity_defect(s, std::span<const SymMatrix>(ops), 80, 6100 + rep);
    REQUIRE(rep_out.defect <= 1e-6);
  }
}
