#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pseudolab/assign.hpp"
#include "pseudolab/eval.hpp"
#include "pseudolab/gmm.hpp"
#include "pseudolab/pyramid.hpp"
#include "pseudolab/sim.hpp"

namespace pseudolab::io {

using json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

json bbox_to_json(const BBox& b);
BBox bbox_from_json(const json& j);

/// Scene file: {"anchors":[[x1,y1,x2,y2],...],
///              "predictions":[{"probs":[...],"bbox":[...]},...],
///              "gts":[{"bbox":[...],"class":c},...]}
Scene scene_from_json(const json& j);
json scene_to_json(const Scene& scene);

json assignment_to_json(const AssignmentResult& result);

/// Scores file: {"classes":{"<id>":[s,...]}}
std::map<int, std::vector<double>> scores_from_json(const json& j);
json thresholds_to_json(const std::map<int, ThresholdDecision>& thresholds);

/// Predictions file: {"images":[{"id":i,"dets":[{"bbox":[...],"class":c,"score":s},...]}]}
std::vector<ImageDetections> detections_from_json(const json& j);
json detections_to_json(std::span<const ImageDetections> images);

/// Ground-truth file: {"images":[{"id":i,"gts":[{"bbox":[...],"class":c},...]}]}
std::vector<ImageGroundTruths> ground_truths_from_json(const json& j);
json ground_truths_to_json(std::span<const ImageGroundTruths> images);

json eval_result_to_json(const EvalResult& result);

/// Pyramid file: {"channels":c,"levels":[{"stride":s,"h":h,"w":w,
///                "data":[[row-major plane per channel],...]},...]}
FeaturePyramid pyramid_from_json(const json& j);
json pyramid_to_json(const FeaturePyramid& p);

/// Offsets reuse the pyramid schema with exactly 3 channels (d0,d1,d2).
OffsetField offsets_from_json(const json& j);

/// Simulation config: flat INI-style sections.
///   [world]  n_images, boxes_per_image, n_classes, image_w, image_h
///   [skill]  pos_mean_start/end, pos_std_start/end, neg_rate_start/end, rho_start/end
///   [run]    steps, checkpoint_every
///   [schedule.NAME]  type=fixed tau=0.4 | type=gmm capacity=200 fallback=0.4 rule=argmax|crossing
struct SimFileConfig {
  WorldConfig world;
  TeacherSkill skill;
  int steps = 500;
  int checkpoint_every = 50;
  std::vector<Schedule> schedules;
};

SimFileConfig sim_config_from_text(const std::string& text);

}  // namespace pseudolab::io
