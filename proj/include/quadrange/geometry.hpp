#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "quadrange/errors.hpp"

namespace quadrange {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew monotone chain, counterclockwise, strictly convex turns only
// (collinear interior points are dropped). Degenerate inputs give back the
// one or two extreme points.
inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point2& a, const Point2& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;

  std::vector<Point2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() == 2 && hull[0].x == hull[1].x && hull[0].y == hull[1].y)
    hull.resize(1);
  return hull;
}

// Shoelace area of a simple polygon given in order; 0 for fewer than 3 points.
inline double polygon_area(const std::vector<Point2>& poly) {
  if (poly.size() < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    s += a.x * b.y - a.y * b.x;
  }
  return 0.5 * std::abs(s);
}

inline double dist_point_segment(const Point2& p, const Point2& a,
                                 const Point2& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  const double cx = a.x + t * dx - p.x;
  const double cy = a.y + t * dy - p.y;
  return std::sqrt(cx * cx + cy * cy);
}

// Positive outside, negative inside (depth to the nearest edge), zero on the
// boundary. Hulls with fewer than 3 vertices have no interior, so the value
// is the plain distance.
inline double signed_dist_to_hull(const Point2& p,
                                  const std::vector<Point2>& hull) {
  if (hull.empty()) return std::numeric_limits<double>::infinity();
  if (hull.size() == 1)
    return std::hypot(p.x - hull[0].x, p.y - hull[0].y);
  if (hull.size() == 2) return dist_point_segment(p, hull[0], hull[1]);

  bool inside = true;
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2& a = hull[i];
    const Point2& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, p) < 0.0) inside = false;
    d = std::min(d, dist_point_segment(p, a, b));
  }
  return inside ? -d : d;
}

}  // namespace quadrange
