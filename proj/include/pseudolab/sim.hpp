#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pseudolab/eval.hpp"
#include "pseudolab/gmm.hpp"

namespace pseudolab {

/// Synthetic stand-in for an unlabeled image set.
struct WorldConfig {
  int n_images = 64;
  int boxes_per_image = 2;
  int n_classes = 8;
  double image_w = 256.0;
  double image_h = 256.0;
  std::uint64_t seed = 7;

  void validate() const;
};

struct World {
  WorldConfig config;
  std::vector<ImageGroundTruths> images;
};

World generate_world(const WorldConfig& config);

/// Teacher behavior at one training step.
struct SkillPoint {
  double pos_mean = 0.5;   // mean confidence on true boxes
  double pos_std = 0.03;   // confidence spread
  double neg_rate = 8.0;   // expected false detections per image
  double rho = 0.1;        // bbox coordinate noise ratio
};

/// Linear schedule between a start and an end skill over the run. The default
/// models a maturing teacher: confidence up, false detections down, box noise
/// down.
struct TeacherSkill {
  SkillPoint start{0.3, 0.02, 16.0, 0.2};
  SkillPoint end{0.9, 0.04, 4.0, 0.02};

  SkillPoint at(int step, int total_steps) const;
  void validate() const;
};

struct EmaState {
  std::vector<double> teacher;
  std::vector<double> student;
  double momentum = 0.9995;
};

/// teacher <- m*teacher + (1-m)*student. m is the weight kept on the teacher.
EmaState ema_update(const EmaState& state);

/// One step of synthetic teacher output: every true box appears perturbed with
/// a clamped-normal score, plus Poisson(neg_rate) false detections with scores
/// centered at half the positive mean. Deterministic per (seed, step, image).
std::vector<ImageDetections> teacher_emit(const World& world, const SkillPoint& skill,
                                          std::uint64_t seed, int step);

struct GmmScheduleConfig {
  std::size_t bank_capacity = 200;
  double fallback_tau = 0.4;
  ThresholdRule rule = ThresholdRule::Argmax;
  EmConfig em;
};

struct Schedule {
  enum class Kind { Fixed, Gmm };
  std::string name;
  Kind kind = Kind::Fixed;
  double fixed_tau = 0.4;
  GmmScheduleConfig gmm;

  static Schedule fixed(std::string name, double tau);
  static Schedule gmm_adaptive(std::string name, GmmScheduleConfig config = {});
};

struct StepRecord {
  int step = 0;
  std::vector<double> tau_per_class;
  std::vector<double> pseudo_per_image_per_class;
  double pseudo_per_image = 0.0;
  double inconsistency_cum = 0.0;
  bool inconsistency_defined = false;
};

struct RunMetrics {
  std::string schedule_name;
  int n_classes = 0;
  std::vector<StepRecord> steps;
  double final_inconsistency = 0.0;
  bool inconsistency_defined = false;
};

/// Runs one threshold schedule: per step, emit teacher detections, filter by
/// the per-class threshold (constant for Fixed; bank+EM+adaptive threshold for
/// Gmm), and at every checkpoint accumulate the pseudo-label inconsistency
/// between consecutive filtered snapshots.
RunMetrics run_schedule(const World& world, const TeacherSkill& skill, const Schedule& schedule,
                        int steps, int checkpoint_every, std::uint64_t seed,
                        const EvalOptions& eval_opts = {});

struct ScheduleSummary {
  std::string name;
  double mean_pseudo_per_image = 0.0;
  double cv_pseudo_per_image = 0.0;
  double final_inconsistency = 0.0;
  bool inconsistency_defined = false;
};

struct CompareResult {
  std::vector<RunMetrics> runs;
  std::vector<ScheduleSummary> summary;
};

/// Runs every schedule over identical teacher streams and summarizes each.
CompareResult compare_schedules(const World& world, const TeacherSkill& skill,
                                std::span<const Schedule> schedules, int steps,
                                int checkpoint_every, std::uint64_t seed,
                                const EvalOptions& eval_opts = {});

/// CSV with header `step,class_id,tau,pseudo_per_image,inconsistency_cum`,
/// one row per (step, class).
std::string run_metrics_csv(const RunMetrics& metrics);

/// CSV with header `schedule,mean_pseudo_per_image,cv_pseudo_per_image,final_inconsistency`.
std::string summary_csv(std::span<const ScheduleSummary> rows);

}  // namespace pseudolab
