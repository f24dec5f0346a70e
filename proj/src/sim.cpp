#include "pseudolab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pseudolab/geom.hpp"
#include "pseudolab/parallel.hpp"
#include "pseudolab/rng.hpp"

namespace pseudolab {

namespace {
constexpr std::uint64_t kEmitTag = 0x7eacull;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// Box draw shared by world generation and false detections:
/// w, h, cx, cy in that order, sizes between 1/16 and 1/4 of the image.
BBox random_box(Rng& rng, double image_w, double image_h) {
  const double w = rng.uniform(image_w / 16.0, image_w / 4.0);
  const double h = rng.uniform(image_h / 16.0, image_h / 4.0);
  const double cx = rng.uniform(0.5 * w, image_w - 0.5 * w);
  const double cy = rng.uniform(0.5 * h, image_h - 0.5 * h);
  return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}
}  // namespace

void WorldConfig::validate() const {
  if (n_images <= 0 || boxes_per_image <= 0 || n_classes <= 0)
    throw DomainError("WorldConfig: counts must be positive");
  if (!(image_w > 0.0) || !(image_h > 0.0)) throw DomainError("WorldConfig: image size must be positive");
}

World generate_world(const WorldConfig& config) {
  config.validate();
  World world{config, {}};
  Rng rng(derive_seed(config.seed, {0x3049ull}));
  world.images.reserve(config.n_images);
  for (int i = 0; i < config.n_images; ++i) {
    ImageGroundTruths img{i, {}};
    img.gts.reserve(config.boxes_per_image);
    for (int b = 0; b < config.boxes_per_image; ++b) {
      const BBox box = random_box(rng, config.image_w, config.image_h);
      const int cls = static_cast<int>(rng.uniform_int(config.n_classes));
      img.gts.push_back({box, cls});
    }
    world.images.push_back(std::move(img));
  }
  return world;
}

SkillPoint TeacherSkill::at(int step, int total_steps) const {
  const double a = total_steps > 1 ? static_cast<double>(step) / (total_steps - 1) : 0.0;
  auto lerp = [a](double s, double e) { return s + a * (e - s); };
  return {lerp(start.pos_mean, end.pos_mean), lerp(start.pos_std, end.pos_std),
          lerp(start.neg_rate, end.neg_rate), lerp(start.rho, end.rho)};
}

void TeacherSkill::validate() const {
  for (const SkillPoint* p : {&start, &end}) {
    if (!(p->pos_mean > 0.0 && p->pos_mean < 1.0))
      throw DomainError("TeacherSkill: pos_mean must lie in (0,1)");
    if (!(p->pos_std >= 0.0) || !(p->neg_rate >= 0.0) || !(p->rho >= 0.0))
      throw DomainError("TeacherSkill: spreads and rates must be >= 0");
  }
}

EmaState ema_update(const EmaState& state) {
  if (state.teacher.size() != state.student.size())
    throw DomainError("ema_update: parameter vectors differ in length");
  if (!(state.momentum >= 0.0 && state.momentum <= 1.0))
    throw DomainError("ema_update: momentum must lie in [0,1]");
  EmaState next = state;
  for (std::size_t i = 0; i < next.teacher.size(); ++i)
    next.teacher[i] = state.momentum * state.teacher[i] + (1.0 - state.momentum) * state.student[i];
  return next;
}

std::vector<ImageDetections> teacher_emit(const World& world, const SkillPoint& skill,
                                          std::uint64_t seed, int step) {
  const WorldConfig& cfg = world.config;
  std::vector<ImageDetections> out(world.images.size());
  parallel_for(world.images.size(), [&](std::size_t i) {
    Rng rng(derive_seed(seed, {kEmitTag, static_cast<std::uint64_t>(step), i}));
    ImageDetections img{world.images[i].image_id, {}};
    for (const GroundTruth& gt : world.images[i].gts) {
      const BBox noisy = perturb_with(gt.bbox, skill.rho, rng);
      const double score = clamp01(rng.normal(skill.pos_mean, skill.pos_std));
      img.dets.push_back({noisy, gt.class_id, score});
    }
    const int n_fp = rng.poisson(skill.neg_rate);
    for (int f = 0; f < n_fp; ++f) {
      const BBox box = random_box(rng, cfg.image_w, cfg.image_h);
      const int cls = static_cast<int>(rng.uniform_int(cfg.n_classes));
      const double score = clamp01(rng.normal(0.5 * skill.pos_mean, skill.pos_std));
      img.dets.push_back({box, cls, score});
    }
    out[i] = std::move(img);
  });
  return out;
}

Schedule Schedule::fixed(std::string name, double tau) {
  Schedule s;
  s.name = std::move(name);
  s.kind = Kind::Fixed;
  s.fixed_tau = tau;
  return s;
}

Schedule Schedule::gmm_adaptive(std::string name, GmmScheduleConfig config) {
  Schedule s;
  s.name = std::move(name);
  s.kind = Kind::Gmm;
  s.gmm = config;
  return s;
}

RunMetrics run_schedule(const World& world, const TeacherSkill& skill, const Schedule& schedule,
                        int steps, int checkpoint_every, std::uint64_t seed,
                        const EvalOptions& eval_opts) {
  world.config.validate();
  skill.validate();
  if (!(steps >= checkpoint_every && checkpoint_every >= 1))
    throw DomainError("run_schedule: need steps >= checkpoint_every >= 1");

  const int n_classes = world.config.n_classes;
  RunMetrics metrics;
  metrics.schedule_name = schedule.name;
  metrics.n_classes = n_classes;
  metrics.steps.reserve(steps);

  std::vector<ScoreBank> banks(
      schedule.kind == Schedule::Kind::Gmm ? n_classes : 0,
      ScoreBank(schedule.gmm.bank_capacity));

  std::vector<ImageDetections> prev_checkpoint;
  int checkpoints_seen = 0;
  double incons = 0.0;

  for (int t = 0; t < steps; ++t) {
    const std::vector<ImageDetections> dets =
        teacher_emit(world, skill.at(t, steps), seed, t);

    std::vector<double> tau(n_classes, schedule.fixed_tau);
    if (schedule.kind == Schedule::Kind::Gmm) {
      std::vector<std::vector<double>> scores_by_class(n_classes);
      for (const ImageDetections& img : dets)
        for (const Detection& d : img.dets) scores_by_class[d.class_id].push_back(d.score);
      parallel_for(static_cast<std::size_t>(n_classes), [&](std::size_t c) {
        banks[c].push(static_cast<int>(c), scores_by_class[c]);
        const std::vector<double> samples = banks[c].contents(static_cast<int>(c));
        tau[c] = threshold_from_scores(samples, schedule.gmm.em, schedule.gmm.fallback_tau,
                                       schedule.gmm.rule)
                     .tau;
      });
    }

    std::vector<ImageDetections> kept(dets.size());
    std::vector<double> per_class(n_classes, 0.0);
    for (std::size_t i = 0; i < dets.size(); ++i) {
      kept[i].image_id = dets[i].image_id;
      for (const Detection& d : dets[i].dets) {
        if (d.score >= tau[d.class_id]) {
          kept[i].dets.push_back(d);
          per_class[d.class_id] += 1.0;
        }
      }
    }
    double total = 0.0;
    for (double& v : per_class) {
      v /= world.config.n_images;
      total += v;
    }

    if ((t + 1) % checkpoint_every == 0) {
      if (checkpoints_seen > 0) incons += inconsistency_pair(prev_checkpoint, kept, eval_opts);
      prev_checkpoint = kept;
      ++checkpoints_seen;
    }

    metrics.steps.push_back(
        {t, tau, per_class, total, incons, checkpoints_seen >= 2});
  }

  metrics.final_inconsistency = incons;
  metrics.inconsistency_defined = checkpoints_seen >= 2;
  return metrics;
}

CompareResult compare_schedules(const World& world, const TeacherSkill& skill,
                                std::span<const Schedule> schedules, int steps,
                                int checkpoint_every, std::uint64_t seed,
                                const EvalOptions& eval_opts) {
  if (schedules.size() < 2) throw DomainError("compare_schedules: need at least two schedules");
  CompareResult result;
  for (const Schedule& s : schedules) {
    RunMetrics run = run_schedule(world, skill, s, steps, checkpoint_every, seed, eval_opts);
    ScheduleSummary sum;
    sum.name = s.name;
    double mean = 0.0;
    for (const StepRecord& r : run.steps) mean += r.pseudo_per_image;
    mean /= run.steps.empty() ? 1.0 : static_cast<double>(run.steps.size());
    double var = 0.0;
    for (const StepRecord& r : run.steps) var += (r.pseudo_per_image - mean) * (r.pseudo_per_image - mean);
    const double stddev = run.steps.size() > 1 ? std::sqrt(var / (run.steps.size() - 1)) : 0.0;
    sum.mean_pseudo_per_image = mean;
    sum.cv_pseudo_per_image = mean > 0.0 ? stddev / mean : 0.0;
    sum.final_inconsistency = run.final_inconsistency;
    sum.inconsistency_defined = run.inconsistency_defined;
    result.summary.push_back(std::move(sum));
    result.runs.push_back(std::move(run));
  }
  return result;
}

std::string run_metrics_csv(const RunMetrics& metrics) {
  std::ostringstream out;
  out << "step,class_id,tau,pseudo_per_image,inconsistency_cum\n";
  char buf[160];
  for (const StepRecord& r : metrics.steps) {
    for (int c = 0; c < metrics.n_classes; ++c) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.6g,%.6g,%.6g\n", r.step, c, r.tau_per_class[c],
                    r.pseudo_per_image_per_class[c], r.inconsistency_cum);
      out << buf;
    }
  }
  return out.str();
}

std::string summary_csv(std::span<const ScheduleSummary> rows) {
  std::ostringstream out;
  out << "schedule,mean_pseudo_per_image,cv_pseudo_per_image,final_inconsistency\n";
  char buf[200];
  for (const ScheduleSummary& s : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%.6g\n", s.name.c_str(), s.mean_pseudo_per_image,
                  s.cv_pseudo_per_image, s.final_inconsistency);
    out << buf;
  }
  return out.str();
}

}  // namespace pseudolab
