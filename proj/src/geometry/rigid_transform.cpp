#include "v2x/geometry/rigid_transform.hpp"

#include <cmath>

namespace v2x {

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

RigidTransform2D::RigidTransform2D(double theta, Point2 translation)
    : rotation_{std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta)},
      translation_(translation) {}

RigidTransform2D::RigidTransform2D(const std::array<double, 4>& rotation, Point2 translation)
    : rotation_(rotation), translation_(translation) {
  const auto& r = rotation_;
  const double det = r[0] * r[3] - r[1] * r[2];
  const double c0 = r[0] * r[0] + r[2] * r[2];
  const double c1 = r[1] * r[1] + r[3] * r[3];
  const double cross = r[0] * r[1] + r[2] * r[3];
  if (std::abs(det - 1.0) > 1e-12 || std::abs(c0 - 1.0) > 1e-12 || std::abs(c1 - 1.0) > 1e-12 ||
      std::abs(cross) > 1e-12) {
    throw std::invalid_argument("rotation is not a proper orthonormal matrix");
  }
}

double RigidTransform2D::angle() const { return std::atan2(rotation_[2], rotation_[0]); }

Point2 RigidTransform2D::apply(const Point2& p) const {
  const auto& r = rotation_;
  return {r[0] * p.x + r[1] * p.y + translation_.x, r[2] * p.x + r[3] * p.y + translation_.y};
}

PointSet2D apply(const RigidTransform2D& t, const PointSet2D& pts) {
  PointSet2D out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(t.apply(p));
  return out;
}

RigidTransform2D compose(const RigidTransform2D& a, const RigidTransform2D& b) {
  const auto& ra = a.rotation();
  const auto& rb = b.rotation();
  // Products of unit rotations stay orthonormal only to rounding; rebuild from the angle.
  const double theta = std::atan2(ra[2] * rb[0] + ra[3] * rb[2], ra[0] * rb[0] + ra[1] * rb[2]);
  return RigidTransform2D(theta, a.apply(b.translation()));
}

RigidTransform2D invert(const RigidTransform2D& t) {
  const auto& r = t.rotation();
  const std::array<double, 4> rt{r[0], r[2], r[1], r[3]};
  const Point2& p = t.translation();
  const Point2 inv_t{-(rt[0] * p.x + rt[1] * p.y), -(rt[2] * p.x + rt[3] * p.y)};
  return RigidTransform2D(rt, inv_t);
}

Matrix rot_feature(const RigidTransform2D& t) {
  const auto& r = t.rotation();
  return Matrix{{r[0], r[1], r[2], r[3], t.translation().x, t.translation().y}};
}

Matrix to_matrix(const PointSet2D& pts) {
  Matrix m(pts.size(), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    m(i, 0) = pts[i].x;
    m(i, 1) = pts[i].y;
  }
  return m;
}

PointSet2D to_points(const Matrix& m) {
  if (m.cols() != 2 && m.rows() > 0) throw DimensionError("points matrix must have 2 columns");
  PointSet2D pts(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) pts[i] = {m(i, 0), m(i, 1)};
  return pts;
}

}  // namespace v2x
