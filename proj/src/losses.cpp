#include "pseudolab/losses.hpp"

#include <algorithm>
#include <cmath>

namespace pseudolab {

namespace {
constexpr double kProbEps = 1e-7;

double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }
}  // namespace

double focal_loss(double p, bool target, const FocalParams& fp) {
  p = clamp_prob(p);
  const double pt = target ? p : 1.0 - p;
  const double at = target ? fp.alpha : 1.0 - fp.alpha;
  return -at * std::pow(1.0 - pt, fp.gamma) * std::log(pt);
}

double quality_focal_loss(double p, double quality, const FocalParams& fp) {
  p = clamp_prob(p);
  const double bce = -(quality * std::log(p) + (1.0 - quality) * std::log(1.0 - p));
  return std::pow(std::abs(quality - p), fp.gamma) * bce;
}

double giou_loss(const BBox& pred, const BBox& target) { return 1.0 - giou(pred, target); }

std::vector<std::vector<double>> cost_matrix(std::span<const BBox> anchor_boxes,
                                             std::span<const Prediction> predictions,
                                             std::span<const GroundTruth> gts,
                                             const CostParams& cp, const FocalParams& fp) {
  if (anchor_boxes.size() != predictions.size())
    throw DomainError("cost_matrix: one anchor box per prediction required");
  std::vector<std::vector<double>> cost(predictions.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const Prediction& pred = predictions[i];
    for (std::size_t j = 0; j < gts.size(); ++j) {
      const GroundTruth& gt = gts[j];
      if (gt.class_id < 0 || static_cast<std::size_t>(gt.class_id) >= pred.class_probs.size())
        throw DomainError("cost_matrix: gt class id outside prediction class range");
      cost[i][j] = focal_loss(pred.class_probs[gt.class_id], true, fp) +
                   cp.lambda_reg * giou_loss(pred.bbox, gt.bbox) +
                   cp.lambda_dist * center_distance(anchor_boxes[i], gt.bbox);
    }
  }
  return cost;
}

double combined_loss(double sup_cls, double sup_reg, double unsup_cls, double unsup_reg,
                     double lambda_u) {
  return (sup_cls + sup_reg) + lambda_u * (unsup_cls + unsup_reg);
}

}  // namespace pseudolab
