#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "v2x/metrics/box.hpp"

namespace v2x {

struct Detection {
  Box box;
  double score = 1.0;
  std::optional<std::int64_t> track_id;
};

enum class MatchCriterion { iou, center_distance };

// IoU thresholds 0.1, 0.2, ..., 1.0.
std::vector<double> default_iou_thresholds();

// Greedy score-descending matching per threshold. For the IoU criterion a pair
// matches when IoU >= r; for center distance when the distance <= r. Each
// threshold contributes AP_r = TP / (TP + FP + FN); the result is their mean.
// Both sets empty gives 1.
double map_score(const std::vector<Detection>& preds, const std::vector<Detection>& gts,
                 const std::vector<double>& thresholds,
                 MatchCriterion criterion = MatchCriterion::iou);

struct TrackedFrame {
  std::vector<Detection> preds;  // track_id holds the predicted identity
  std::vector<Detection> gts;    // track_id holds the ground-truth identity
};

struct AmotaConfig {
  std::size_t points = 41;
  double gate = 2.0;  // center distance, meters
};

struct MotaCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t idsw = 0;
  std::size_t gt = 0;
};

// Counts over all frames keeping predictions with score >= min_score; per-frame
// Hungarian association on center distance within the gate.
MotaCounts mota_counts(const std::vector<TrackedFrame>& frames, double min_score, double gate);

// max(0, 1 - (FN + FP + IDSW - (1 - r) GT) / (r GT)), capped at 1.
double mota_at_recall(const MotaCounts& counts, double r);

// Mean of MOTA_r over r = 1/(n-1), ..., 1. For each r the highest score threshold
// reaching recall r is used; if none reaches it MOTA_r = 0. NaN when there is no GT.
double amota(const std::vector<TrackedFrame>& frames, const AmotaConfig& config = {});

}  // namespace v2x
