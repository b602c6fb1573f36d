#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "quadrange/geometry.hpp"
#include "quadrange/io.hpp"
#include "quadrange/quadmap.hpp"

namespace quadrange {

struct SvgOptions {
  int width = 640;
  int height = 480;
};

namespace detail {

struct PlotBox {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  int width = 0, height = 0;
  double pad = 0.0;

  double mapx(double x) const {
    return pad + (x - xmin) / (xmax - xmin) * (width - 2.0 * pad);
  }
  // SVG y grows downward.
  double mapy(double y) const {
    return height - pad - (y - ymin) / (ymax - ymin) * (height - 2.0 * pad);
  }
};

inline PlotBox fit_box(const std::vector<Point2>& pts, const SvgOptions& opt) {
  PlotBox b;
  b.width = opt.width;
  b.height = opt.height;
  b.pad = 0.06 * std::min(opt.width, opt.height);
  b.xmin = b.ymin = std::numeric_limits<double>::infinity();
  b.xmax = b.ymax = -std::numeric_limits<double>::infinity();
  for (const Point2& p : pts) {
    b.xmin = std::min(b.xmin, p.x);
    b.xmax = std::max(b.xmax, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.ymax = std::max(b.ymax, p.y);
  }
  // Degenerate spans still need a nonzero scale.
  if (!(b.xmax - b.xmin > 0.0)) {
    b.xmin -= 1.0;
    b.xmax += 1.0;
  }
  if (!(b.ymax - b.ymin > 0.0)) {
    b.ymin -= 1.0;
    b.ymax += 1.0;
  }
  return b;
}

// Fixed two-decimal coordinates keep the files small and byte-stable.
inline std::string coord(double v) {
  return format_double(std::round(v * 100.0) / 100.0);
}

inline std::string svg_open(const SvgOptions& opt) {
  const std::string w = std::to_string(opt.width);
  const std::string h = std::to_string(opt.height);
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w +
         "\" height=\"" + h + "\" viewBox=\"0 0 " + w + " " + h + "\">\n" +
         "<rect width=\"" + w + "\" height=\"" + h + "\" fill=\"#ffffff\"/>\n";
}

}  // namespace detail

// Scatter of planar points with an optional traced boundary polyline.
inline std::string scatter_svg(const std::vector<Point2>& points,
                               const std::vector<Point2>& boundary,
                               const SvgOptions& opt = {}) {
  if (points.empty() && boundary.empty())
    throw InvalidInput("scatter_svg: nothing to draw");
  std::vector<Point2> all = points;
  all.insert(all.end(), boundary.begin(), boundary.end());
  const detail::PlotBox box = detail::fit_box(all, opt);

  std::string out = detail::svg_open(opt);
  if (!boundary.empty()) {
    out += "<polyline class=\"boundary\" fill=\"none\" stroke=\"#2b6cb0\" "
           "stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      if (i) out += ' ';
      out += detail::coord(box.mapx(boundary[i].x)) + ',' +
             detail::coord(box.mapy(boundary[i].y));
    }
    // Close the loop back to the first vertex.
    out += ' ' + detail::coord(box.mapx(boundary[0].x)) + ',' +
           detail::coord(box.mapy(boundary[0].y));
    out += "\"/>\n";
  }
  for (const Point2& p : points) {
    out += "<circle class=\"pt\" cx=\"" + detail::coord(box.mapx(p.x)) +
           "\" cy=\"" + detail::coord(box.mapy(p.y)) +
           "\" r=\"2.4\" fill=\"#e5484d\" fill-opacity=\"0.75\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

// Residual decay per truncation on a log10 vertical axis.
inline std::string decay_svg(const std::vector<GapRow>& rows,
                             const SvgOptions& opt = {}) {
  if (rows.empty()) throw InvalidInput("decay_svg: nothing to draw");
  std::vector<Point2> pts;
  pts.reserve(rows.size());
  for (const GapRow& r : rows) {
    const double y =
        r.best_residual > 1e-300 ? std::log10(r.best_residual) : -300.0;
    pts.push_back({static_cast<double>(r.N), y});
  }
  const detail::PlotBox box = detail::fit_box(pts, opt);

  std::string out = detail::svg_open(opt);
  out += "<line class=\"axis\" x1=\"" + detail::coord(box.pad) + "\" y1=\"" +
         detail::coord(opt.height - box.pad) + "\" x2=\"" +
         detail::coord(opt.width - box.pad) + "\" y2=\"" +
         detail::coord(opt.height - box.pad) +
         "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  out += "<line class=\"axis\" x1=\"" + detail::coord(box.pad) + "\" y1=\"" +
         detail::coord(box.pad) + "\" x2=\"" + detail::coord(box.pad) +
         "\" y2=\"" + detail::coord(opt.height - box.pad) +
         "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  out += "<polyline class=\"decay\" fill=\"none\" stroke=\"#2b6cb0\" "
         "stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ' ';
    out += detail::coord(box.mapx(pts[i].x)) + ',' +
           detail::coord(box.mapy(pts[i].y));
  }
  out += "\"/>\n";
  for (const Point2& p : pts) {
    out += "<circle class=\"pt\" cx=\"" + detail::coord(box.mapx(p.x)) +
           "\" cy=\"" + detail::coord(box.mapy(p.y)) +
           "\" r=\"3\" fill=\"#e5484d\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace quadrange
