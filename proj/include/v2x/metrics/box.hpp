#pragma once

#include <array>

#include "v2x/geometry/rigid_transform.hpp"

namespace v2x {

// Oriented bird's-eye-view rectangle; length runs along the heading.
struct Box {
  Point2 center;
  double length = 4.0;
  double width = 1.8;
  double heading = 0.0;

  friend bool operator==(const Box&, const Box&) = default;
};

// Counter-clockwise corners.
std::array<Point2, 4> corners(const Box& b);
bool contains(const Box& b, const Point2& p);
// Area of intersection of two oriented boxes (convex polygon clipping).
double intersection_area(const Box& a, const Box& b);
// Exactly 1 for identical boxes.
double box_iou(const Box& a, const Box& b);
// Separating-axis test; touching edges count as overlap.
bool boxes_overlap(const Box& a, const Box& b);

}  // namespace v2x
