#pragma once

#include <map>
#include <span>
#include <vector>

#include "pseudolab/losses.hpp"

namespace pseudolab {

struct Detection {
  BBox bbox;
  int class_id = 0;
  double score = 0.0;
};

struct ImageDetections {
  int image_id = 0;
  std::vector<Detection> dets;
};

struct ImageGroundTruths {
  int image_id = 0;
  std::vector<GroundTruth> gts;
};

struct EvalResult {
  std::vector<std::pair<double, double>> ap_per_iou_threshold;  // (threshold, AP)
  double map_50_95 = 0.0;
  std::map<int, double> per_class_ap;
};

struct DetMatch {
  int det_index = -1;  // index into the input detection list
  int gt_index = -1;   // matched gt, or -1 for a miss
};

struct EvalOptions {
  int max_dets_per_image = 100;
  double inconsistency_score_cutoff = 0.4;
};

/// Greedy score-descending matching at one IoU threshold: each detection takes
/// the highest-IoU unmatched ground truth of its own class with IoU >= iou_thr.
/// Returned in processing (score-descending) order.
std::vector<DetMatch> match_greedy(const ImageDetections& dets, std::span<const GroundTruth> gts,
                                   double iou_thr);

/// 101-point interpolated AP over score-ranked TP/FP flags. With n_gt == 0 the
/// result is 0 when any detection exists and 1 when none does.
double average_precision(std::span<const bool> ranked_tp_flags, int n_gt);

/// COCO-style AP averaged over IoU thresholds 0.50:0.05:0.95 and over classes
/// with at least one ground truth. Throws DegenerateError when the dataset has
/// no ground truth at all; DomainError when predictions reference unknown images.
EvalResult map_50_95(std::span<const ImageDetections> preds,
                     std::span<const ImageGroundTruths> gts, const EvalOptions& opts = {});

/// Accumulated pseudo-label drift: sum over consecutive checkpoint pairs of
/// 1 - mAP(current predictions vs previous checkpoint promoted to GT at the
/// score cutoff). Needs at least two checkpoints.
double inconsistency(std::span<const std::vector<ImageDetections>> checkpoint_preds,
                     const EvalOptions& opts = {});

/// One consecutive-pair term of the accumulated metric.
double inconsistency_pair(std::span<const ImageDetections> prev,
                          std::span<const ImageDetections> curr, const EvalOptions& opts = {});

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
};

/// OLS of max-IoU on confidence; std_error = sqrt(SSR / (n-2)). Lower error
/// means better confidence/quality calibration.
RegressionResult confidence_iou_regression(std::span<const std::pair<double, double>> pairs);

}  // namespace pseudolab
