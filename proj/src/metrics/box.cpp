#include "v2x/metrics/box.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace v2x {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double polygon_area(const std::vector<Point2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * std::abs(s);
}

void check(const Box& b) {
  if (!(b.length > 0.0) || !(b.width > 0.0)) {
    throw std::invalid_argument("box extent must be positive");
  }
}

}  // namespace

std::array<Point2, 4> corners(const Box& b) {
  const double c = std::cos(b.heading), s = std::sin(b.heading);
  const double hl = 0.5 * b.length, hw = 0.5 * b.width;
  std::array<Point2, 4> out;
  const double sx[4] = {1, -1, -1, 1};
  const double sy[4] = {1, 1, -1, -1};
  // Order (+,+), (-,+), (-,-), (+,-) is counter-clockwise.
  for (int k = 0; k < 4; ++k) {
    const double lx = sx[k] * hl, ly = sy[k] * hw;
    out[k] = {b.center.x + c * lx - s * ly, b.center.y + s * lx + c * ly};
  }
  return out;
}

bool contains(const Box& b, const Point2& p) {
  const double c = std::cos(b.heading), s = std::sin(b.heading);
  const double dx = p.x - b.center.x, dy = p.y - b.center.y;
  const double lx = c * dx + s * dy;
  const double ly = -s * dx + c * dy;
  return std::abs(lx) <= 0.5 * b.length && std::abs(ly) <= 0.5 * b.width;
}

double intersection_area(const Box& a, const Box& b) {
  check(a);
  check(b);
  const auto ca = corners(a);
  const auto cb = corners(b);
  std::vector<Point2> poly(ca.begin(), ca.end());
  // Sutherland-Hodgman against each edge of b.
  for (int e = 0; e < 4 && !poly.empty(); ++e) {
    const Point2& p = cb[e];
    const Point2& q = cb[(e + 1) % 4];
    std::vector<Point2> next;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2& cur = poly[i];
      const Point2& prev = poly[(i + poly.size() - 1) % poly.size()];
      const double dc = cross(p, q, cur);
      const double dp = cross(p, q, prev);
      if (dc >= 0) {
        if (dp < 0) {
          const double t = dp / (dp - dc);
          next.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
        }
        next.push_back(cur);
      } else if (dp >= 0) {
        const double t = dp / (dp - dc);
        next.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
      }
    }
    poly = std::move(next);
  }
  return poly.size() < 3 ? 0.0 : polygon_area(poly);
}

double box_iou(const Box& a, const Box& b) {
  check(a);
  check(b);
  if (a == b) return 1.0;
  const double inter = intersection_area(a, b);
  const double uni = a.length * a.width + b.length * b.width - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

bool boxes_overlap(const Box& a, const Box& b) {
  check(a);
  check(b);
  const auto ca = corners(a);
  const auto cb = corners(b);
  for (const auto* box : {&ca, &cb}) {
    for (int e = 0; e < 2; ++e) {
      const Point2& p = (*box)[e];
      const Point2& q = (*box)[e + 1];
      const double nx = -(q.y - p.y), ny = q.x - p.x;
      double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
      for (const auto& c : ca) {
        const double d = nx * c.x + ny * c.y;
        amin = std::min(amin, d);
        amax = std::max(amax, d);
      }
      for (const auto& c : cb) {
        const double d = nx * c.x + ny * c.y;
        bmin = std::min(bmin, d);
        bmax = std::max(bmax, d);
      }
      if (amax < bmin || bmax < amin) return false;
    }
  }
  return true;
}

}  // namespace v2x
