#include <doctest.h>

#include <algorithm>
#include <set>

#include "pseudolab/assign.hpp"
#include "test_support.hpp"

using namespace pseudolab;

namespace {

Anchor box_anchor(const BBox& b, int level = 0) { return {b, level, 0, 0}; }

Prediction pred_for(int anchor, std::vector<double> probs, const BBox& box) {
  Prediction p;
  p.anchor_index = anchor;
  p.class_probs = std::move(probs);
  p.bbox = box;
  return p;
}

std::set<int> positive_set(const AssignmentResult& r, int gt) {
  std::set<int> out;
  for (std::size_t i = 0; i < r.anchors.size(); ++i)
    if (r.anchors[i].state == AnchorState::Positive && r.anchors[i].gt_index == gt)
      out.insert(static_cast<int>(i));
  return out;
}

}  // namespace

TEST_CASE("assign_iou basics") {
  const std::vector<Anchor> anchors{box_anchor(BBox{0, 0, 10, 10})};
  const std::vector<GroundTruth> gts{{BBox{0, 0, 10, 10}, 0}};
  const AssignmentResult r = assign_iou(anchors, gts, 0.5, 0.4);
  CHECK(r.anchors[0].state == AnchorState::Positive);
  CHECK(r.anchors[0].gt_index == 0);

  const std::vector<GroundTruth> far{{BBox{50, 50, 60, 60}, 0}};
  CHECK(assign_iou(anchors, far, 0.5, 0.4).anchors[0].state == AnchorState::Negative);

  CHECK(assign_iou(anchors, {}, 0.5, 0.4).anchors[0].state == AnchorState::Negative);
  CHECK_THROWS_AS(assign_iou(anchors, gts, 0.4, 0.5), DomainError);
}

TEST_CASE("assign_iou leaves a mid-overlap anchor ignored when each gt has a better anchor") {
  // A2 overlaps both gts at exactly IoU 0.45: between neg 0.4 and pos 0.5.
  const std::vector<Anchor> anchors{
      box_anchor(BBox{0, 0, 9, 10}),    // A0: identical to gt0
      box_anchor(BBox{11, 0, 20, 10}),  // A1: identical to gt1
      box_anchor(BBox{0, 0, 20, 10}),   // A2: IoU 90/200 = 0.45 with both
  };
  const std::vector<GroundTruth> gts{{BBox{0, 0, 9, 10}, 0}, {BBox{11, 0, 20, 10}, 0}};
  const AssignmentResult r = assign_iou(anchors, gts, 0.5, 0.4);
  CHECK(r.anchors[0].state == AnchorState::Positive);
  CHECK(r.anchors[0].gt_index == 0);
  CHECK(r.anchors[1].state == AnchorState::Positive);
  CHECK(r.anchors[1].gt_index == 1);
  CHECK(r.anchors[2].state == AnchorState::Ignore);
}

TEST_CASE("assign_iou rescues each gt's best anchor below the positive threshold") {
  const std::vector<Anchor> anchors{box_anchor(BBox{0, 0, 10, 10}), box_anchor(BBox{30, 30, 40, 40})};
  const std::vector<GroundTruth> gts{{BBox{7, 0, 17, 10}, 0}};  // IoU 0.3/0.17 with A0, 0 with A1
  const AssignmentResult r = assign_iou(anchors, gts, 0.5, 0.4);
  CHECK(r.anchors[0].state == AnchorState::Positive);  // rescued despite IoU < pos_thr
  CHECK(r.anchors[0].gt_index == 0);
  CHECK(r.anchors[1].state == AnchorState::Negative);
}

TEST_CASE("assign_atss single candidate meets its own mean+std threshold") {
  const std::vector<Anchor> anchors{box_anchor(BBox{0, 0, 10, 10})};
  const std::vector<GroundTruth> gts{{BBox{0, 0, 10, 9}, 0}};  // IoU 0.9, center inside
  const AssignmentResult r = assign_atss(anchors, gts, 9);
  CHECK(r.anchors[0].state == AnchorState::Positive);
  CHECK(r.anchors[0].gt_index == 0);
}

TEST_CASE("assign_atss rejects anchors whose center is outside the gt") {
  const std::vector<Anchor> anchors{box_anchor(BBox{0, 0, 10, 10})};  // center (5,5)
  const std::vector<GroundTruth> gts{{BBox{6, 0, 16, 10}, 0}};
  const AssignmentResult r = assign_atss(anchors, gts, 9);
  CHECK(r.anchors[0].state == AnchorState::Negative);
}

TEST_CASE("assign_atss matches a hand-enumerated two-level scene") {
  // top-1 per level candidates for the gt at (0,0,8,8):
  //   level 0 -> A0 (center distance 0), level 1 -> A2 (distance ~5.66)
  //   IoUs {1.0, 0.25}: mean 0.625, std 0.375, threshold 1.0
  //   A0 passes (IoU 1, center inside); A2 fails the threshold.
  const std::vector<Anchor> anchors{
      box_anchor(BBox{0, 0, 8, 8}, 0), box_anchor(BBox{8, 0, 16, 8}, 0),
      box_anchor(BBox{0, 0, 16, 16}, 1), box_anchor(BBox{16, 0, 32, 16}, 1)};
  const std::vector<GroundTruth> gts{{BBox{0, 0, 8, 8}, 0}};
  const AssignmentResult r = assign_atss(anchors, gts, 1);
  CHECK(r.anchors[0].state == AnchorState::Positive);
  CHECK(r.anchors[1].state == AnchorState::Negative);
  CHECK(r.anchors[2].state == AnchorState::Negative);
  CHECK(r.anchors[3].state == AnchorState::Negative);
}

TEST_CASE("assign_atss resolves multi-gt claims by higher IoU") {
  const std::vector<Anchor> anchors{box_anchor(BBox{0, 0, 10, 10})};
  const std::vector<GroundTruth> gts{{BBox{0, 0, 10, 12}, 0}, {BBox{0, 0, 10, 11}, 1}};
  const AssignmentResult r = assign_atss(anchors, gts, 9);
  CHECK(r.anchors[0].state == AnchorState::Positive);
  CHECK(r.anchors[0].gt_index == 1);  // IoU 10/11 beats 10/12
}

TEST_CASE("assign_asa zero-loss prediction leaves only the distance prior") {
  const std::vector<Anchor> anchors{box_anchor(BBox{1, 1, 3, 3})};
  const std::vector<GroundTruth> gts{{BBox{0, 0, 2, 2}, 0}};
  const std::vector<Prediction> preds{pred_for(0, {1.0}, BBox{0, 0, 2, 2})};
  AsaParams params;
  params.k = 1;
  params.cost.lambda_dist = 0.5;
  const AssignmentResult r = assign_asa(anchors, preds, gts, params);
  REQUIRE(r.anchors[0].state == AnchorState::Positive);
  CHECK(r.anchors[0].cost ==
        doctest::Approx(0.5 * center_distance(anchors[0].bbox, gts[0].bbox)).epsilon(1e-5));
}

TEST_CASE("assign_asa picks the global min-cost anchor for K=1") {
  const std::vector<Anchor> anchors{box_anchor(BBox{0, 0, 4, 4}), box_anchor(BBox{1, 1, 5, 5}),
                                    box_anchor(BBox{8, 8, 12, 12})};
  const std::vector<GroundTruth> gts{{BBox{1, 1, 5, 5}, 0}};
  const std::vector<Prediction> preds{pred_for(0, {0.3}, BBox{0, 0, 4, 4}),
                                      pred_for(1, {0.8}, BBox{1, 1, 5, 5}),
                                      pred_for(2, {0.1}, BBox{8, 8, 12, 12})};
  AsaParams params;
  params.k = 1;
  const AssignmentResult r = assign_asa(anchors, preds, gts, params);

  // brute-force oracle: recompute all costs and sort
  std::vector<BBox> boxes;
  for (const Anchor& a : anchors) boxes.push_back(a.bbox);
  const auto cost = cost_matrix(boxes, preds, gts, params.cost, params.focal);
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (cost[i][0] < cost[best][0]) best = i;
  for (int i = 0; i < 3; ++i) {
    if (i == best) {
      CHECK(r.anchors[i].state == AnchorState::Positive);
      CHECK(r.anchors[i].cost == doctest::Approx(cost[i][0]).epsilon(1e-12));
    } else {
      CHECK(r.anchors[i].state == AnchorState::Negative);
    }
  }
}

TEST_CASE("assign_asa gives a contested anchor to the cheaper gt without re-allocation") {
  // One anchor is the top-1 candidate of both gts; the losing gt ends up empty.
  const std::vector<Anchor> anchors{box_anchor(BBox{0, 0, 4, 4}), box_anchor(BBox{40, 40, 44, 44})};
  const std::vector<GroundTruth> gts{{BBox{0, 0, 4, 4}, 0}, {BBox{1, 1, 5, 5}, 0}};
  const std::vector<Prediction> preds{pred_for(0, {0.9}, BBox{0, 0, 4, 4}),
                                      pred_for(1, {0.01}, BBox{40, 40, 44, 44})};
  AsaParams params;
  params.k = 1;
  const AssignmentResult r = assign_asa(anchors, preds, gts, params);
  // anchor 0 is cheapest for both gts; cost vs gt0 (exact box match) is lower
  CHECK(r.anchors[0].state == AnchorState::Positive);
  CHECK(r.anchors[0].gt_index == 0);
  CHECK(positive_set(r, 1).empty());
  CHECK(r.anchors[1].state == AnchorState::Negative);
}

TEST_CASE("assign_asa positive count and uniqueness invariants") {
  const Scene scene = testsupport::make_benchmark_scene(3);
  AsaParams params;
  const AssignmentResult r = assign_asa(scene.anchors, scene.predictions, scene.gts, params);
  std::size_t positives = 0;
  for (const AnchorAssignment& a : r.anchors) {
    if (a.state == AnchorState::Positive) {
      ++positives;
      CHECK(a.gt_index >= 0);
      CHECK(a.gt_index < r.n_gts);
    }
    CHECK(a.state != AnchorState::Ignore);  // ASA has no ignore state
  }
  CHECK(positives <= static_cast<std::size_t>(params.k) * scene.gts.size());
}

TEST_CASE("assign_asa positives are invariant under a joint affine cost rescale") {
  // constant classification term makes scaling (lambda_reg, lambda_dist) an
  // affine map of the whole cost matrix, which must not move the top-K sets
  Scene scene = testsupport::make_benchmark_scene(5);
  for (Prediction& p : scene.predictions)
    std::fill(p.class_probs.begin(), p.class_probs.end(), 0.5);
  AsaParams a;
  a.cost = {2.0, 0.001};
  AsaParams b;
  b.cost = {6.0, 0.003};
  const AssignmentResult ra = assign_asa(scene.anchors, scene.predictions, scene.gts, a);
  const AssignmentResult rb = assign_asa(scene.anchors, scene.predictions, scene.gts, b);
  for (std::size_t i = 0; i < ra.anchors.size(); ++i) {
    CHECK(ra.anchors[i].state == rb.anchors[i].state);
    if (ra.anchors[i].state == AnchorState::Positive)
      CHECK(ra.anchors[i].gt_index == rb.anchors[i].gt_index);
  }
}

TEST_CASE("assign_asa reduces to the distance prior for identical perfect predictions") {
  // all predictions share one box and prob 1: per-gt ranking is by center distance
  const PyramidSpec spec = testsupport::benchmark_pyramid_spec();
  std::vector<Anchor> anchors = generate_anchors(spec);
  const std::vector<GroundTruth> gts{{BBox{10, 10, 30, 30}, 0}, {BBox{90, 90, 120, 126}, 0}};
  std::vector<Prediction> preds;
  for (std::size_t i = 0; i < anchors.size(); ++i)
    preds.push_back(pred_for(static_cast<int>(i), {1.0}, gts[0].bbox));
  AsaParams params;
  params.k = 5;
  const AssignmentResult r = assign_asa(anchors, preds, gts, params);

  for (int j = 0; j < 2; ++j) {
    std::vector<std::pair<double, int>> by_dist;
    for (std::size_t i = 0; i < anchors.size(); ++i)
      by_dist.emplace_back(center_distance(anchors[i].bbox, gts[j].bbox), static_cast<int>(i));
    std::sort(by_dist.begin(), by_dist.end());
    std::set<int> expect;
    for (int k = 0; k < params.k; ++k) expect.insert(by_dist[k].second);
    CHECK(positive_set(r, j) == expect);
  }
}

TEST_CASE("assignment_aiou set arithmetic") {
  auto make = [](std::size_t n_anchors, int n_gts, const std::set<int>& pos, int gt) {
    AssignmentResult r;
    r.n_gts = n_gts;
    r.anchors.assign(n_anchors, {});
    for (int i : pos) r.anchors[i] = {AnchorState::Positive, gt, 0.0};
    return r;
  };
  const auto a = make(6, 1, {1, 2, 3}, 0);
  const auto b = make(6, 1, {2, 3, 4}, 0);
  CHECK(assignment_aiou(a, b, 0) == doctest::Approx(0.5));
  CHECK(assignment_aiou(b, a, 0) == doctest::Approx(0.5));
  CHECK(assignment_aiou(a, a, 0) == 1.0);
  const auto c = make(6, 1, {4, 5}, 0);
  CHECK(assignment_aiou(a, c, 0) == 0.0);
  const auto empty = make(6, 1, {}, 0);
  CHECK(assignment_aiou(empty, empty, 0) == 1.0);
  CHECK_THROWS_AS(assignment_aiou(a, b, 1), DomainError);
  const auto other = make(5, 1, {}, 0);
  CHECK_THROWS_AS(assignment_aiou(a, other, 0), DomainError);
}

TEST_CASE("aiou_experiment returns exactly 1.0 at rho zero") {
  const Scene scene = testsupport::make_benchmark_scene(13);
  const std::vector<double> rhos{0.0};
  for (AssignerKind kind : {AssignerKind::Iou, AssignerKind::Atss, AssignerKind::Asa}) {
    AssignerConfig cfg;
    cfg.kind = kind;
    const auto rows = aiou_experiment(scene, cfg, rhos, 3, 5);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_aiou == 1.0);
    CHECK(rows[0].std_aiou == 0.0);
  }
}

TEST_CASE("aiou_experiment: heavier noise degrades the iou assigner") {
  const Scene scene = testsupport::make_benchmark_scene(21);
  AssignerConfig cfg;
  cfg.kind = AssignerKind::Iou;
  const std::vector<double> rhos{0.1, 0.5};
  const auto rows = aiou_experiment(scene, cfg, rhos, 100, 7);
  CHECK(rows[1].mean_aiou <= rows[0].mean_aiou);
}

TEST_CASE("aiou_experiment: asa is at least as robust as iou at rho 0.3") {
  const Scene scene = testsupport::make_benchmark_scene(31);
  const std::vector<double> rhos{0.3};
  AssignerConfig asa;
  asa.kind = AssignerKind::Asa;
  AssignerConfig iou_cfg;
  iou_cfg.kind = AssignerKind::Iou;
  const auto a = aiou_experiment(scene, asa, rhos, 100, 7);
  const auto b = aiou_experiment(scene, iou_cfg, rhos, 100, 7);
  CHECK(a[0].mean_aiou >= b[0].mean_aiou);
}

TEST_CASE("aiou_experiment is deterministic per seed and emits the module CSV") {
  const Scene scene = testsupport::make_benchmark_scene(41, 4);
  AssignerConfig cfg;
  cfg.kind = AssignerKind::Atss;
  const std::vector<double> rhos{0.1, 0.2};
  const auto r1 = aiou_experiment(scene, cfg, rhos, 10, 3);
  const auto r2 = aiou_experiment(scene, cfg, rhos, 10, 3);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].mean_aiou == r2[i].mean_aiou);
    CHECK(r1[i].std_aiou == r2[i].std_aiou);
  }
  const std::string csv = aiou_table_csv(r1);
  CHECK(csv.rfind("rho,mean_aiou,std_aiou,trials\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("every assigner is deterministic on the same inputs") {
  const Scene scene = testsupport::make_benchmark_scene(55);
  for (AssignerKind kind : {AssignerKind::Iou, AssignerKind::Atss, AssignerKind::Asa}) {
    AssignerConfig cfg;
    cfg.kind = kind;
    const AssignmentResult a = run_assigner(cfg, scene);
    const AssignmentResult b = run_assigner(cfg, scene);
    REQUIRE(a.anchors.size() == b.anchors.size());
    for (std::size_t i = 0; i < a.anchors.size(); ++i) {
      CHECK(a.anchors[i].state == b.anchors[i].state);
      CHECK(a.anchors[i].gt_index == b.anchors[i].gt_index);
    }
  }
}
