#include "v2x/comm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace v2x {

void ChannelBudget::validate() const {
  if (!(bytes_per_second >= 0.0)) throw std::invalid_argument("channel cap must be >= 0");
  if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz)) {
    throw std::invalid_argument("channel frequency must be positive");
  }
}

double bps(const std::vector<V2XMessage>& frame, double frequency_hz) {
  if (!(frequency_hz > 0.0)) throw std::invalid_argument("bps: frequency must be positive");
  std::size_t bytes = 0;
  for (const auto& m : frame) bytes += m.payload_bytes();
  return static_cast<double>(bytes) * frequency_hz;
}

namespace {

V2XMessage keep_rows(const V2XMessage& m, std::vector<std::size_t> rows) {
  std::sort(rows.begin(), rows.end());
  V2XMessage out = m;
  out.count = static_cast<std::uint32_t>(rows.size());
  out.features.clear();
  out.refs.clear();
  out.scores.clear();
  for (std::size_t r : rows) {
    out.features.insert(out.features.end(), m.features.begin() + r * m.dim,
                        m.features.begin() + (r + 1) * m.dim);
    out.refs.push_back(m.refs[2 * r]);
    out.refs.push_back(m.refs[2 * r + 1]);
    out.scores.push_back(m.scores[r]);
  }
  return out;
}

V2XMessage drop_grid(const V2XMessage& m) {
  V2XMessage out = m;
  out.height = 0;
  out.width = 0;
  out.probs.clear();
  return out;
}

}  // namespace

std::vector<V2XMessage> constrain(const std::vector<V2XMessage>& frame, const ChannelBudget& budget) {
  budget.validate();
  // Same product as bps(), so the cap holds exactly.
  const auto fits = [&](double bytes) {
    return bytes * budget.frequency_hz <= budget.bytes_per_second;
  };
  double used = 0.0;
  std::vector<V2XMessage> out = frame;
  for (auto& m : out) {
    if (!carries_queries(m.kind)) continue;
    m.validate();
    const double row_bytes = 4.0 * (m.dim + 2.0);
    std::vector<std::size_t> order(m.count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return m.scores[a] > m.scores[b]; });
    std::vector<std::size_t> kept;
    for (std::size_t r : order) {
      if (!fits(used + row_bytes)) break;
      used += row_bytes;
      kept.push_back(r);
    }
    if (kept.size() != m.count) m = keep_rows(m, std::move(kept));
  }
  for (auto& m : out) {
    if (carries_queries(m.kind)) continue;
    const double bytes = static_cast<double>(m.payload_bytes());
    if (fits(used + bytes)) {
      used += bytes;
    } else {
      m = drop_grid(m);
    }
  }
  return out;
}

}  // namespace v2x
