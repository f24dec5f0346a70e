#include "pseudolab/assign.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "pseudolab/parallel.hpp"

namespace pseudolab {

std::vector<std::vector<int>> AssignmentResult::positives_per_gt() const {
  std::vector<std::vector<int>> out(n_gts);
  for (std::size_t i = 0; i < anchors.size(); ++i)
    if (anchors[i].state == AnchorState::Positive) out[anchors[i].gt_index].push_back(static_cast<int>(i));
  return out;
}

AssignmentResult assign_iou(std::span<const Anchor> anchors, std::span<const GroundTruth> gts,
                            double pos_thr, double neg_thr) {
  if (!(0.0 <= neg_thr && neg_thr <= pos_thr && pos_thr <= 1.0))
    throw DomainError("assign_iou: need 0 <= neg_thr <= pos_thr <= 1");
  AssignmentResult result;
  result.n_gts = static_cast<int>(gts.size());
  result.anchors.assign(anchors.size(), {});
  if (gts.empty()) return result;

  std::vector<double> gt_best_iou(gts.size(), 0.0);
  std::vector<int> gt_best_anchor(gts.size(), -1);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    double best = 0.0;
    int best_gt = -1;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      const double v = iou(anchors[i].bbox, gts[j].bbox);
      if (v > best) {  // ties keep the lowest gt index
        best = v;
        best_gt = static_cast<int>(j);
      }
      if (v > gt_best_iou[j]) {  // ties keep the lowest anchor index
        gt_best_iou[j] = v;
        gt_best_anchor[j] = static_cast<int>(i);
      }
    }
    AnchorAssignment& a = result.anchors[i];
    if (best >= pos_thr && best_gt >= 0) {
      a = {AnchorState::Positive, best_gt, 1.0 - best};
    } else if (best < neg_thr) {
      a = {AnchorState::Negative, -1, 0.0};
    } else {
      a = {AnchorState::Ignore, -1, 0.0};
    }
  }

  // Low-quality match rescue: the best anchor of each gt is forced positive.
  // When two gts claim the same anchor, the higher IoU wins (ties: lower gt).
  std::map<int, std::pair<int, double>> forced;  // anchor -> (gt, iou)
  for (std::size_t j = 0; j < gts.size(); ++j) {
    if (gt_best_anchor[j] < 0 || gt_best_iou[j] <= 0.0) continue;
    auto [it, inserted] = forced.emplace(gt_best_anchor[j], std::make_pair(static_cast<int>(j), gt_best_iou[j]));
    if (!inserted && gt_best_iou[j] > it->second.second)
      it->second = {static_cast<int>(j), gt_best_iou[j]};
  }
  for (const auto& [anchor, claim] : forced)
    result.anchors[anchor] = {AnchorState::Positive, claim.first, 1.0 - claim.second};
  return result;
}

AssignmentResult assign_atss(std::span<const Anchor> anchors, std::span<const GroundTruth> gts,
                             int topk_per_level) {
  if (topk_per_level < 1) throw DomainError("assign_atss: topk_per_level must be >= 1");
  AssignmentResult result;
  result.n_gts = static_cast<int>(gts.size());
  result.anchors.assign(anchors.size(), {});
  if (gts.empty()) return result;

  std::map<int, std::vector<int>> by_level;
  for (std::size_t i = 0; i < anchors.size(); ++i) by_level[anchors[i].level].push_back(static_cast<int>(i));

  std::vector<double> claimed_iou(anchors.size(), -1.0);
  for (std::size_t j = 0; j < gts.size(); ++j) {
    const BBox& gt = gts[j].bbox;
    std::vector<int> candidates;
    for (const auto& [level, idx] : by_level) {
      std::vector<std::pair<double, int>> dist;
      dist.reserve(idx.size());
      for (int i : idx) dist.emplace_back(center_distance(anchors[i].bbox, gt), i);
      std::sort(dist.begin(), dist.end());
      const std::size_t take = std::min<std::size_t>(topk_per_level, dist.size());
      for (std::size_t k = 0; k < take; ++k) candidates.push_back(dist[k].second);
    }
    if (candidates.empty()) continue;
    std::vector<double> cand_iou(candidates.size());
    double mean = 0.0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      cand_iou[k] = iou(anchors[candidates[k]].bbox, gt);
      mean += cand_iou[k];
    }
    mean /= static_cast<double>(candidates.size());
    double var = 0.0;
    for (double v : cand_iou) var += (v - mean) * (v - mean);
    const double thr = mean + std::sqrt(var / static_cast<double>(candidates.size()));

    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const int i = candidates[k];
      const double cx = anchors[i].bbox.center_x();
      const double cy = anchors[i].bbox.center_y();
      const bool inside = gt.x1 <= cx && cx <= gt.x2 && gt.y1 <= cy && cy <= gt.y2;
      if (cand_iou[k] >= thr && inside && cand_iou[k] > claimed_iou[i]) {
        claimed_iou[i] = cand_iou[k];
        result.anchors[i] = {AnchorState::Positive, static_cast<int>(j), 1.0 - cand_iou[k]};
      }
    }
  }
  return result;
}

AssignmentResult assign_asa(std::span<const Anchor> anchors,
                            std::span<const Prediction> predictions,
                            std::span<const GroundTruth> gts, const AsaParams& params) {
  if (params.k < 1) throw DomainError("assign_asa: K must be >= 1");
  if (anchors.size() != predictions.size())
    throw DomainError("assign_asa: one prediction per anchor required");
  AssignmentResult result;
  result.n_gts = static_cast<int>(gts.size());
  result.anchors.assign(anchors.size(), {});
  if (gts.empty()) return result;

  std::vector<BBox> anchor_boxes;
  anchor_boxes.reserve(anchors.size());
  for (const Anchor& a : anchors) anchor_boxes.push_back(a.bbox);
  const std::vector<std::vector<double>> cost =
      cost_matrix(anchor_boxes, predictions, gts, params.cost, params.focal);

  const std::size_t k = std::min<std::size_t>(params.k, anchors.size());
  std::vector<std::vector<int>> gt_of_anchor(anchors.size());
  std::vector<int> order(anchors.size());
  for (std::size_t j = 0; j < gts.size(); ++j) {
    std::iota(order.begin(), order.end(), 0);
    // ties on cost resolve to the lower anchor index
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return cost[a][j] < cost[b][j]; });
    for (std::size_t t = 0; t < k; ++t) gt_of_anchor[order[t]].push_back(static_cast<int>(j));
  }

  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (gt_of_anchor[i].empty()) continue;
    int best_gt = gt_of_anchor[i].front();  // candidate lists ascend, so ties pick the lower gt
    for (int j : gt_of_anchor[i])
      if (cost[i][j] < cost[i][best_gt]) best_gt = j;
    result.anchors[i] = {AnchorState::Positive, best_gt, cost[i][best_gt]};
  }
  return result;
}

double assignment_aiou(const AssignmentResult& a, const AssignmentResult& b, int gt_index) {
  if (a.anchors.size() != b.anchors.size() || a.n_gts != b.n_gts)
    throw DomainError("assignment_aiou: results cover different anchor or gt lists");
  if (gt_index < 0 || gt_index >= a.n_gts) throw DomainError("assignment_aiou: gt_index out of range");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.anchors.size(); ++i) {
    const bool ina = a.anchors[i].state == AnchorState::Positive && a.anchors[i].gt_index == gt_index;
    const bool inb = b.anchors[i].state == AnchorState::Positive && b.anchors[i].gt_index == gt_index;
    inter += (ina && inb) ? 1 : 0;
    uni += (ina || inb) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

AssignerKind assigner_kind_from_name(const std::string& name) {
  if (name == "iou") return AssignerKind::Iou;
  if (name == "atss") return AssignerKind::Atss;
  if (name == "asa") return AssignerKind::Asa;
  throw DomainError("unknown assigner: " + name);
}

std::string assigner_name(AssignerKind kind) {
  switch (kind) {
    case AssignerKind::Iou: return "iou";
    case AssignerKind::Atss: return "atss";
    case AssignerKind::Asa: return "asa";
  }
  return "?";
}

static AssignmentResult run_assigner_on(const AssignerConfig& cfg, std::span<const Anchor> anchors,
                                        std::span<const Prediction> predictions,
                                        std::span<const GroundTruth> gts) {
  switch (cfg.kind) {
    case AssignerKind::Iou:
      return assign_iou(anchors, gts, cfg.iou_pos_thr, cfg.iou_neg_thr);
    case AssignerKind::Atss:
      return assign_atss(anchors, gts, cfg.atss_topk);
    case AssignerKind::Asa:
      return assign_asa(anchors, predictions, gts, cfg.asa);
  }
  throw DomainError("run_assigner: bad assigner kind");
}

AssignmentResult run_assigner(const AssignerConfig& cfg, const Scene& scene) {
  return run_assigner_on(cfg, scene.anchors, scene.predictions, scene.gts);
}

std::vector<AiouRow> aiou_experiment(const Scene& scene, const AssignerConfig& assigner,
                                     std::span<const double> rhos, int trials,
                                     std::uint64_t seed) {
  if (trials < 1) throw DomainError("aiou_experiment: trials must be >= 1");
  const AssignmentResult baseline = run_assigner(assigner, scene);
  const std::size_t n_gts = scene.gts.size();

  std::vector<std::vector<double>> per_trial(rhos.size(), std::vector<double>(trials, 1.0));
  parallel_for(rhos.size() * static_cast<std::size_t>(trials), [&](std::size_t flat) {
    const std::size_t ri = flat / trials;
    const std::size_t trial = flat % trials;
    NoiseModel noise(rhos[ri], derive_seed(seed, {0xa10u, ri, trial}));
    std::vector<GroundTruth> noisy_gts(scene.gts.begin(), scene.gts.end());
    for (GroundTruth& gt : noisy_gts) gt.bbox = perturb(gt.bbox, noise);
    const AssignmentResult perturbed =
        run_assigner_on(assigner, scene.anchors, scene.predictions, noisy_gts);
    double mean = 0.0;
    for (std::size_t j = 0; j < n_gts; ++j)
      mean += assignment_aiou(baseline, perturbed, static_cast<int>(j));
    per_trial[ri][trial] = n_gts == 0 ? 1.0 : mean / static_cast<double>(n_gts);
  });

  std::vector<AiouRow> rows;
  rows.reserve(rhos.size());
  for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
    double mean = 0.0;
    for (double v : per_trial[ri]) mean += v;
    mean /= trials;
    double var = 0.0;
    for (double v : per_trial[ri]) var += (v - mean) * (v - mean);
    const double stddev = trials > 1 ? std::sqrt(var / (trials - 1)) : 0.0;
    rows.push_back({rhos[ri], mean, stddev, trials});
  }
  return rows;
}

std::string aiou_table_csv(std::span<const AiouRow> rows) {
  std::ostringstream out;
  out << "rho,mean_aiou,std_aiou,trials\n";
  char buf[128];
  for (const AiouRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%.6g,%d\n", r.rho, r.mean_aiou, r.std_aiou, r.trials);
    out << buf;
  }
  return out.str();
}

}  // namespace pseudolab
