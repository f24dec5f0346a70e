#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pseudolab/losses.hpp"
#include "pseudolab/pyramid.hpp"

namespace pseudolab {

enum class AnchorState { Positive, Negative, Ignore };

struct AnchorAssignment {
  AnchorState state = AnchorState::Negative;
  int gt_index = -1;    // valid when Positive
  double cost = 0.0;    // matching cost of the positive pair
};

struct AssignmentResult {
  std::vector<AnchorAssignment> anchors;
  int n_gts = 0;

  /// Positive anchor indices grouped by ground truth, each list ascending.
  std::vector<std::vector<int>> positives_per_gt() const;
};

/// Static RetinaNet-style assignment: positive above pos_thr to the best-IoU
/// ground truth, negative below neg_thr, ignore in between. Each ground
/// truth's single best-IoU anchor (if overlapping at all) is rescued positive.
AssignmentResult assign_iou(std::span<const Anchor> anchors, std::span<const GroundTruth> gts,
                            double pos_thr = 0.5, double neg_thr = 0.4);

/// ATSS: per ground truth, the topk closest-center anchors per level are
/// candidates; the positive threshold is mean+std of the candidate IoUs and
/// the anchor center must lie inside the ground truth box.
AssignmentResult assign_atss(std::span<const Anchor> anchors, std::span<const GroundTruth> gts,
                             int topk_per_level = 9);

struct AsaParams {
  CostParams cost;
  FocalParams focal;
  int k = 13;
};

/// Cost-based adaptive sample assignment: per ground truth the K lowest-cost
/// anchors become candidates; an anchor wanted by several ground truths goes
/// to its cheapest one; everything else is negative (no ignore state).
AssignmentResult assign_asa(std::span<const Anchor> anchors,
                            std::span<const Prediction> predictions,
                            std::span<const GroundTruth> gts, const AsaParams& params = {});

/// Jaccard similarity of the positive-anchor sets of one ground truth across
/// two assignments over the same anchor list; 1 when both sets are empty.
double assignment_aiou(const AssignmentResult& a, const AssignmentResult& b, int gt_index);

enum class AssignerKind { Iou, Atss, Asa };

/// One assigner with its parameters, so experiments can treat strategies uniformly.
struct AssignerConfig {
  AssignerKind kind = AssignerKind::Asa;
  double iou_pos_thr = 0.5;
  double iou_neg_thr = 0.4;
  int atss_topk = 9;
  AsaParams asa;
};

AssignerKind assigner_kind_from_name(const std::string& name);
std::string assigner_name(AssignerKind kind);

struct Scene {
  std::vector<Anchor> anchors;
  std::vector<Prediction> predictions;
  std::vector<GroundTruth> gts;
};

AssignmentResult run_assigner(const AssignerConfig& cfg, const Scene& scene);

struct AiouRow {
  double rho = 0.0;
  double mean_aiou = 0.0;
  double std_aiou = 0.0;
  int trials = 0;
};

/// Noise-robustness experiment: for each rho and trial, perturb every ground
/// truth box, re-run the assigner and average assignment_aiou over ground
/// truths. Per-trial streams derive from (seed, rho index, trial index), so
/// results are identical under any parallel schedule.
std::vector<AiouRow> aiou_experiment(const Scene& scene, const AssignerConfig& assigner,
                                     std::span<const double> rhos, int trials,
                                     std::uint64_t seed);

/// Module CSV form: header `rho,mean_aiou,std_aiou,trials`.
std::string aiou_table_csv(std::span<const AiouRow> rows);

}  // namespace pseudolab
