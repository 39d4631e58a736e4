#include "v2x/metrics/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "v2x/metrics/assignment.hpp"

namespace v2x {

std::vector<double> default_iou_thresholds() {
  std::vector<double> r;
  for (int i = 1; i <= 10; ++i) r.push_back(i / 10.0);
  return r;
}

namespace {

bool matches(const Detection& p, const Detection& g, double r, MatchCriterion c, double* quality) {
  if (c == MatchCriterion::iou) {
    const double iou = box_iou(p.box, g.box);
    *quality = iou;
    return iou + 1e-12 >= r;
  }
  const double d = distance(p.box.center, g.box.center);
  *quality = -d;
  return d <= r;
}

std::vector<std::size_t> score_order(const std::vector<Detection>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

}  // namespace

double map_score(const std::vector<Detection>& preds, const std::vector<Detection>& gts,
                 const std::vector<double>& thresholds, MatchCriterion criterion) {
  if (thresholds.empty()) throw std::invalid_argument("map_score: thresholds must be nonempty");
  if (preds.empty() && gts.empty()) return 1.0;
  const std::vector<std::size_t> order = score_order(preds);
  double total = 0.0;
  for (double r : thresholds) {
    std::vector<char> taken(gts.size(), 0);
    std::size_t tp = 0;
    for (std::size_t pi : order) {
      std::size_t best = gts.size();
      double best_q = -std::numeric_limits<double>::infinity();
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (taken[g]) continue;
        double q = 0.0;
        if (matches(preds[pi], gts[g], r, criterion, &q) && q > best_q) {
          best = g;
          best_q = q;
        }
      }
      if (best < gts.size()) {
        taken[best] = 1;
        ++tp;
      }
    }
    const std::size_t fp = preds.size() - tp;
    const std::size_t fn = gts.size() - tp;
    total += static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
  }
  return total / static_cast<double>(thresholds.size());
}

MotaCounts mota_counts(const std::vector<TrackedFrame>& frames, double min_score, double gate) {
  MotaCounts c;
  std::map<std::int64_t, std::int64_t> last_match;  // gt id -> predicted id
  for (const auto& frame : frames) {
    std::vector<const Detection*> kept;
    for (const auto& p : frame.preds)
      if (p.score >= min_score) kept.push_back(&p);
    c.gt += frame.gts.size();
    Matrix cost(kept.size(), frame.gts.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = 0; j < frame.gts.size(); ++j)
        cost(i, j) = distance(kept[i]->box.center, frame.gts[j].box.center);
    const Assignment a = hungarian(cost, gate);
    c.tp += a.pairs.size();
    c.fp += kept.size() - a.pairs.size();
    c.fn += frame.gts.size() - a.pairs.size();
    for (const auto& [i, j] : a.pairs) {
      const auto& gid = frame.gts[j].track_id;
      const auto& pid = kept[i]->track_id;
      if (!gid || !pid) continue;
      const auto it = last_match.find(*gid);
      if (it != last_match.end() && it->second != *pid) ++c.idsw;
      last_match[*gid] = *pid;
    }
  }
  return c;
}

double mota_at_recall(const MotaCounts& c, double r) {
  const double gt = static_cast<double>(c.gt);
  const double num = static_cast<double>(c.fn + c.fp + c.idsw) - (1.0 - r) * gt;
  return std::clamp(1.0 - num / (r * gt), 0.0, 1.0);
}

double amota(const std::vector<TrackedFrame>& frames, const AmotaConfig& config) {
  if (config.points < 2) throw std::invalid_argument("amota: need at least 2 points");
  std::size_t gt = 0;
  std::set<double, std::greater<>> scores;
  for (const auto& f : frames) {
    gt += f.gts.size();
    for (const auto& p : f.preds) scores.insert(p.score);
  }
  if (gt == 0) return std::numeric_limits<double>::quiet_NaN();
  // Counts for each candidate threshold, highest first.
  std::vector<MotaCounts> sweep;
  for (double s : scores) sweep.push_back(mota_counts(frames, s, config.gate));
  const std::size_t steps = config.points - 1;
  double total = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double r = static_cast<double>(k) / static_cast<double>(steps);
    for (const auto& c : sweep) {
      if (static_cast<double>(c.tp) >= r * static_cast<double>(gt) - 1e-9) {
        total += mota_at_recall(c, r);
        break;
      }
    }
  }
  return total / static_cast<double>(steps);
}

}  // namespace v2x
