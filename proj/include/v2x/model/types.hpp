#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "v2x/geometry/rigid_transform.hpp"
#include "v2x/numerics/matrix.hpp"

namespace v2x {

enum class QueryKind : std::uint8_t { track = 0, map = 1, motion = 3 };

std::string to_string(QueryKind kind);

// Queries of one kind from one agent. refs are reference points (track, map) or
// anchors (motion), scores are confidences.
struct QuerySet {
  QueryKind kind = QueryKind::track;
  std::uint32_t agent = 0;
  Matrix queries;  // N x D
  PointSet2D refs;
  std::vector<double> scores;

  std::size_t count() const { return queries.rows(); }
  std::size_t dim() const { return queries.cols(); }
  bool empty() const { return count() == 0; }
  void validate() const;

  friend bool operator==(const QuerySet&, const QuerySet&) = default;
};

QuerySet empty_queries(QueryKind kind, std::size_t dim, std::uint32_t agent = 0);

struct BevState {
  std::size_t height = 0;
  std::size_t width = 0;
  double cell_size = 1.0;
  Matrix tokens;  // (height * width) x D

  void validate() const;
  friend bool operator==(const BevState&, const BevState&) = default;
};

// Multi-modal forecasts: agents x modes x steps points plus per-agent mode scores.
struct TrajectorySet {
  std::size_t agents = 0;
  std::size_t modes = 6;
  std::size_t steps = 12;
  std::vector<Point2> points;  // agent-major, then mode, then step
  Matrix scores;               // agents x modes

  TrajectorySet() = default;
  TrajectorySet(std::size_t agents, std::size_t modes, std::size_t steps);

  Point2& at(std::size_t a, std::size_t m, std::size_t t) {
    return points[(a * modes + m) * steps + t];
  }
  const Point2& at(std::size_t a, std::size_t m, std::size_t t) const {
    return points[(a * modes + m) * steps + t];
  }
  void validate() const;

  friend bool operator==(const TrajectorySet&, const TrajectorySet&) = default;
};

struct LossBreakdown {
  double track = 0.0;
  double map = 0.0;
  double occ = 0.0;
  double mot = 0.0;
  double plan = 0.0;
  double moe = 0.0;
  double total = 0.0;

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

}  // namespace v2x
