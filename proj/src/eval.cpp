#include "pseudolab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace pseudolab {

std::vector<DetMatch> match_greedy(const ImageDetections& dets, std::span<const GroundTruth> gts,
                                   double iou_thr) {
  if (!(iou_thr > 0.0 && iou_thr <= 1.0)) throw DomainError("match_greedy: iou_thr must be in (0,1]");
  std::vector<int> order(dets.dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dets.dets[a].score > dets.dets[b].score; });

  std::vector<bool> gt_used(gts.size(), false);
  std::vector<DetMatch> out;
  out.reserve(order.size());
  for (int di : order) {
    const Detection& d = dets.dets[di];
    int best_gt = -1;
    double best_iou = 0.0;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (gt_used[j] || gts[j].class_id != d.class_id) continue;
      const double v = iou(d.bbox, gts[j].bbox);
      if (v >= iou_thr && v > best_iou) {  // strict > keeps the lowest index on ties
        best_iou = v;
        best_gt = static_cast<int>(j);
      }
    }
    if (best_gt >= 0) gt_used[best_gt] = true;
    out.push_back({di, best_gt});
  }
  return out;
}

double average_precision(std::span<const bool> ranked_tp_flags, int n_gt) {
  if (n_gt < 0) throw DomainError("average_precision: n_gt must be >= 0");
  if (n_gt == 0) return ranked_tp_flags.empty() ? 1.0 : 0.0;

  const std::size_t n = ranked_tp_flags.size();
  std::vector<double> precision(n), recall(n);
  int tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += ranked_tp_flags[k] ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / n_gt;
  }
  // interpolated precision: running max from the end
  for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);

  double ap = 0.0;
  std::size_t k = 0;
  for (int r = 0; r <= 100; ++r) {
    const double target = r / 100.0;
    while (k < n && recall[k] < target - 1e-12) ++k;
    if (k < n) ap += precision[k];
  }
  return ap / 101.0;
}

namespace {

std::vector<double> coco_thresholds() {
  std::vector<double> out;
  for (int i = 0; i < 10; ++i) out.push_back(0.50 + 0.05 * i);
  return out;
}

struct ScoredFlag {
  double score;
  int image_pos;  // position of the image in the gts list; part of the sort key
  int det_pos;    // per-image detection ordinal after capping
  bool tp;
};

}  // namespace

EvalResult map_50_95(std::span<const ImageDetections> preds,
                     std::span<const ImageGroundTruths> gts, const EvalOptions& opts) {
  std::map<int, int> image_pos;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (!image_pos.emplace(gts[i].image_id, static_cast<int>(i)).second)
      throw DomainError("map_50_95: duplicate image id in ground truth");
  }
  for (const ImageDetections& img : preds)
    if (!image_pos.count(img.image_id))
      throw DomainError("map_50_95: prediction references unknown image id");

  std::set<int> class_ids;
  std::size_t total_gt = 0;
  for (const ImageGroundTruths& img : gts) {
    for (const GroundTruth& g : img.gts) class_ids.insert(g.class_id);
    total_gt += img.gts.size();
  }
  if (total_gt == 0) throw DegenerateError("map_50_95: dataset has no ground truth");

  // Cap detections per image by score (ties keep the earlier detection).
  std::vector<ImageDetections> capped(preds.begin(), preds.end());
  for (ImageDetections& img : capped) {
    if (static_cast<int>(img.dets.size()) <= opts.max_dets_per_image) continue;
    std::vector<int> order(img.dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return img.dets[a].score > img.dets[b].score; });
    order.resize(opts.max_dets_per_image);
    std::sort(order.begin(), order.end());
    std::vector<Detection> keep;
    keep.reserve(order.size());
    for (int i : order) keep.push_back(img.dets[i]);
    img.dets = std::move(keep);
  }
  // Index predictions by image for per-image matching.
  std::map<int, const ImageDetections*> preds_by_image;
  for (const ImageDetections& img : capped) preds_by_image[img.image_id] = &img;

  const std::vector<double> thresholds = coco_thresholds();
  EvalResult result;
  std::map<int, std::vector<double>> class_aps;  // class -> AP per threshold

  for (double thr : thresholds) {
    double ap_sum = 0.0;
    for (int cls : class_ids) {
      std::vector<ScoredFlag> flags;
      int n_gt_c = 0;
      for (const ImageGroundTruths& img : gts) {
        std::vector<GroundTruth> cls_gts;
        for (const GroundTruth& g : img.gts)
          if (g.class_id == cls) cls_gts.push_back(g);
        n_gt_c += static_cast<int>(cls_gts.size());

        auto it = preds_by_image.find(img.image_id);
        if (it == preds_by_image.end()) continue;
        ImageDetections cls_dets{img.image_id, {}};
        for (const Detection& d : it->second->dets)
          if (d.class_id == cls) cls_dets.dets.push_back(d);
        const std::vector<DetMatch> matches = match_greedy(cls_dets, cls_gts, thr);
        for (const DetMatch& m : matches)
          flags.push_back({cls_dets.dets[m.det_index].score, image_pos.at(img.image_id),
                           m.det_index, m.gt_index >= 0});
      }
      std::sort(flags.begin(), flags.end(), [](const ScoredFlag& a, const ScoredFlag& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.image_pos != b.image_pos) return a.image_pos < b.image_pos;
        return a.det_pos < b.det_pos;
      });
      std::vector<bool> tp(flags.size());
      for (std::size_t i = 0; i < flags.size(); ++i) tp[i] = flags[i].tp;
      const double ap = average_precision(tp, n_gt_c);
      ap_sum += ap;
      class_aps[cls].push_back(ap);
    }
    result.ap_per_iou_threshold.emplace_back(thr, ap_sum / static_cast<double>(class_ids.size()));
  }

  double total = 0.0;
  for (const auto& [thr, ap] : result.ap_per_iou_threshold) total += ap;
  result.map_50_95 = total / static_cast<double>(result.ap_per_iou_threshold.size());
  for (const auto& [cls, aps] : class_aps) {
    double mean = 0.0;
    for (double a : aps) mean += a;
    result.per_class_ap[cls] = mean / static_cast<double>(aps.size());
  }
  return result;
}

namespace {

std::vector<ImageGroundTruths> promote_to_gt(std::span<const ImageDetections> preds, double cutoff) {
  std::vector<ImageGroundTruths> out;
  out.reserve(preds.size());
  for (const ImageDetections& img : preds) {
    ImageGroundTruths g{img.image_id, {}};
    for (const Detection& d : img.dets)
      if (d.score >= cutoff) g.gts.push_back({d.bbox, d.class_id});
    out.push_back(std::move(g));
  }
  return out;
}

bool all_empty(const std::vector<ImageGroundTruths>& gts) {
  for (const ImageGroundTruths& img : gts)
    if (!img.gts.empty()) return false;
  return true;
}

}  // namespace

double inconsistency_pair(std::span<const ImageDetections> prev,
                          std::span<const ImageDetections> curr, const EvalOptions& opts) {
  const std::vector<ImageGroundTruths> promoted =
      promote_to_gt(prev, opts.inconsistency_score_cutoff);
  if (all_empty(promoted)) {
    // Nothing survived the cutoff in the reference checkpoint: the pair is
    // consistent iff the current one is empty at the same cutoff.
    const std::vector<ImageGroundTruths> curr_promoted =
        promote_to_gt(curr, opts.inconsistency_score_cutoff);
    return all_empty(curr_promoted) ? 0.0 : 1.0;
  }
  const EvalResult r = map_50_95(curr, promoted, opts);
  return 1.0 - r.map_50_95;
}

double inconsistency(std::span<const std::vector<ImageDetections>> checkpoint_preds,
                     const EvalOptions& opts) {
  if (checkpoint_preds.size() < 2)
    throw DomainError("inconsistency: need at least two checkpoints");
  double acc = 0.0;
  for (std::size_t t = 1; t < checkpoint_preds.size(); ++t)
    acc += inconsistency_pair(checkpoint_preds[t - 1], checkpoint_preds[t], opts);
  return acc;
}

RegressionResult confidence_iou_regression(std::span<const std::pair<double, double>> pairs) {
  const std::size_t n = pairs.size();
  if (n < 3) throw DegenerateError("confidence_iou_regression: need at least 3 pairs");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw DegenerateError("confidence_iou_regression: constant confidence");
  RegressionResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ssr = 0.0;
  for (const auto& [x, y] : pairs) {
    const double e = y - (r.intercept + r.slope * x);
    ssr += e * e;
  }
  r.std_error = std::sqrt(ssr / static_cast<double>(n - 2));
  return r;
}

}  // namespace pseudolab
