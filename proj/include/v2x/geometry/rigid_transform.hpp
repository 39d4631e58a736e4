#pragma once

#include <array>
#include <vector>

#include "v2x/numerics/matrix.hpp"

namespace v2x {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
  friend Point2 operator+(const Point2& a, const Point2& b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(const Point2& a, const Point2& b) { return {a.x - b.x, a.y - b.y}; }
};

using PointSet2D = std::vector<Point2>;

double distance(const Point2& a, const Point2& b);

// Planar rigid motion p -> R p + t.
class RigidTransform2D {
 public:
  RigidTransform2D() = default;
  RigidTransform2D(double theta, Point2 translation);
  // Rotation given row-major as {r00, r01, r10, r11}; must be orthonormal with det +1.
  RigidTransform2D(const std::array<double, 4>& rotation, Point2 translation);

  static RigidTransform2D identity() { return {}; }

  const std::array<double, 4>& rotation() const { return rotation_; }
  const Point2& translation() const { return translation_; }
  double angle() const;

  Point2 apply(const Point2& p) const;

  friend bool operator==(const RigidTransform2D&, const RigidTransform2D&) = default;

 private:
  std::array<double, 4> rotation_{1.0, 0.0, 0.0, 1.0};
  Point2 translation_{};
};

PointSet2D apply(const RigidTransform2D& t, const PointSet2D& pts);
// apply(compose(a, b), p) == apply(a, apply(b, p)).
RigidTransform2D compose(const RigidTransform2D& a, const RigidTransform2D& b);
RigidTransform2D invert(const RigidTransform2D& t);

// 1x6 row: rotation row-major followed by translation.
Matrix rot_feature(const RigidTransform2D& t);

// Points as an Nx2 matrix and back.
Matrix to_matrix(const PointSet2D& pts);
PointSet2D to_points(const Matrix& m);

}  // namespace v2x
