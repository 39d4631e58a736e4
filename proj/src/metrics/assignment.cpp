#include "v2x/metrics/assignment.hpp"

#include <algorithm>
#include <cmath>

namespace v2x {

namespace {

// Shortest augmenting path with potentials; requires n <= m. Returns the column
// assigned to each row.
std::vector<std::size_t> solve(const Matrix& a) {
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_of_row(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) col_of_row[p[j] - 1] = j - 1;
  }
  return col_of_row;
}

}  // namespace

Assignment hungarian(const Matrix& cost, double gate) {
  if (!cost.all_finite()) throw ContractError("hungarian: cost matrix must be finite");
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  Assignment out;
  if (n == 0 || m == 0) {
    for (std::size_t i = 0; i < n; ++i) out.unmatched_rows.push_back(i);
    for (std::size_t j = 0; j < m; ++j) out.unmatched_cols.push_back(j);
    return out;
  }
  double big = 1.0;
  for (double c : cost.data()) big = std::max(big, std::abs(c));
  big = big * static_cast<double>(std::max(n, m) + 1) * 4.0;
  const bool flip = n > m;
  Matrix work = flip ? transpose(cost) : cost;
  for (auto& c : work.data()) {
    if (c > gate) c = big;
  }
  const std::vector<std::size_t> match = solve(work);
  std::vector<char> row_used(n, 0), col_used(m, 0);
  for (std::size_t k = 0; k < match.size(); ++k) {
    const std::size_t r = flip ? match[k] : k;
    const std::size_t c = flip ? k : match[k];
    if (cost(r, c) > gate) continue;
    out.pairs.emplace_back(r, c);
    row_used[r] = 1;
    col_used[c] = 1;
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (const auto& [r, c] : out.pairs) out.total_cost += cost(r, c);
  for (std::size_t i = 0; i < n; ++i)
    if (!row_used[i]) out.unmatched_rows.push_back(i);
  for (std::size_t j = 0; j < m; ++j)
    if (!col_used[j]) out.unmatched_cols.push_back(j);
  return out;
}

}  // namespace v2x
