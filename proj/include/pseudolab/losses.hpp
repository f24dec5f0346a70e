#pragma once

#include <span>
#include <vector>

#include "pseudolab/geom.hpp"

namespace pseudolab {

struct FocalParams {
  double gamma = 2.0;
  double alpha = 0.25;
};

struct CostParams {
  double lambda_reg = 2.0;
  double lambda_dist = 0.001;
};

struct GroundTruth {
  BBox bbox;
  int class_id = 0;
};

/// Per-anchor detector output used for cost-based assignment. class_probs are
/// independent per-class sigmoid confidences; no sum-to-1 constraint.
struct Prediction {
  int anchor_index = -1;
  std::vector<double> class_probs;
  BBox bbox;
};

/// Focal loss of a binary prediction; p is clamped to [1e-7, 1-1e-7].
double focal_loss(double p, bool target, const FocalParams& fp = {});

/// Quality focal loss: |quality - p|^gamma * BCE(p, quality). alpha unused.
double quality_focal_loss(double p, double quality, const FocalParams& fp = {});

/// 1 - GIoU, in [0, 2).
double giou_loss(const BBox& pred, const BBox& target);

/// Matching cost between every (anchor prediction, ground truth) pair:
///   C[i][j] = focal(p_i[class_j], 1) + lambda_reg * giou_loss(pred_i, gt_j)
///           + lambda_dist * center_distance(anchor_i, gt_j).
/// anchor_boxes supplies the prior term; one box per prediction, same order.
/// Returned row-major, predictions x gts.
std::vector<std::vector<double>> cost_matrix(std::span<const BBox> anchor_boxes,
                                             std::span<const Prediction> predictions,
                                             std::span<const GroundTruth> gts,
                                             const CostParams& cp = {}, const FocalParams& fp = {});

/// Supervised + lambda_u-weighted unsupervised loss combination.
double combined_loss(double sup_cls, double sup_reg, double unsup_cls, double unsup_reg,
                     double lambda_u = 2.0);

}  // namespace pseudolab
