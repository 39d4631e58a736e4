#include "v2x/model/types.hpp"

#include <cmath>

namespace v2x {

std::string to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::track:
      return "track";
    case QueryKind::map:
      return "map";
    case QueryKind::motion:
      return "motion";
  }
  return "unknown";
}

void QuerySet::validate() const {
  if (refs.size() != count() || scores.size() != count()) {
    throw DimensionError(to_string(kind) + " query set: " + std::to_string(count()) +
                         " queries, " + std::to_string(refs.size()) + " refs, " +
                         std::to_string(scores.size()) + " scores");
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw ContractError("query score outside [0,1]");
  }
}

QuerySet empty_queries(QueryKind kind, std::size_t dim, std::uint32_t agent) {
  QuerySet q;
  q.kind = kind;
  q.agent = agent;
  q.queries = Matrix(0, dim);
  return q;
}

void BevState::validate() const {
  if (height < 2 || width < 2) throw DimensionError("bev grid must be at least 2x2");
  if (tokens.rows() != height * width) {
    throw DimensionError("bev tokens " + tokens.shape_string() + " for grid " +
                         std::to_string(height) + "x" + std::to_string(width));
  }
}

TrajectorySet::TrajectorySet(std::size_t a, std::size_t m, std::size_t t)
    : agents(a), modes(m), steps(t), points(a * m * t), scores(a, m) {}

void TrajectorySet::validate() const {
  if (points.size() != agents * modes * steps || scores.rows() != agents ||
      scores.cols() != modes) {
    throw DimensionError("trajectory set sizes inconsistent");
  }
  for (std::size_t a = 0; a < agents; ++a) {
    double s = 0.0;
    for (double v : scores.row(a)) s += v;
    if (std::abs(s - 1.0) > 1e-9) throw ContractError("mode scores must sum to 1");
  }
}

}  // namespace v2x
