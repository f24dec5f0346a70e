#include "pseudolab/cli.hpp"

#include <functional>
#include <iostream>
#include <sstream>

#include "pseudolab/io.hpp"

namespace pseudolab::cli {

namespace {

io::json parse_json_file(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  return io::json::parse(text);  // throws nlohmann parse_error on bad syntax
}

AssignerConfig assigner_config_from_name(const std::string& name) {
  AssignerConfig cfg;
  cfg.kind = assigner_kind_from_name(name);
  return cfg;
}

}  // namespace

int cmd_assign(const AssignOptions& opts) {
  const Scene scene = io::scene_from_json(parse_json_file(opts.scene_path));
  AssignerConfig cfg = assigner_config_from_name(opts.assigner);
  cfg.asa.k = opts.k;
  cfg.asa.cost.lambda_reg = opts.lambda_reg;
  cfg.asa.cost.lambda_dist = opts.lambda_dist;
  if (cfg.kind == AssignerKind::Asa && scene.predictions.empty())
    throw DomainError("asa assigner requires scene predictions");
  const AssignmentResult result = run_assigner(cfg, scene);
  io::write_file(opts.out_path, io::assignment_to_json(result).dump(2) + "\n");
  return kOk;
}

int cmd_aiou(const AiouOptions& opts) {
  const Scene scene = io::scene_from_json(parse_json_file(opts.scene_path));
  std::ostringstream csv;
  csv << "assigner,rho,mean_aiou,std_aiou\n";
  char buf[160];
  for (const std::string& name : opts.assigners) {
    AssignerConfig cfg = assigner_config_from_name(name);
    if (cfg.kind == AssignerKind::Asa && scene.predictions.empty())
      throw DomainError("asa assigner requires scene predictions");
    const std::vector<AiouRow> rows =
        aiou_experiment(scene, cfg, opts.rhos, opts.trials, opts.seed);
    for (const AiouRow& r : rows) {
      std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%.6g\n", name.c_str(), r.rho, r.mean_aiou,
                    r.std_aiou);
      csv << buf;
    }
  }
  io::write_file(opts.out_path, csv.str());
  return kOk;
}

int cmd_gmm(const GmmOptions& opts) {
  const auto scores = io::scores_from_json(parse_json_file(opts.scores_path));
  ThresholdRule rule;
  if (opts.rule == "argmax") rule = ThresholdRule::Argmax;
  else if (opts.rule == "crossing") rule = ThresholdRule::Crossing;
  else throw ParseError("rule must be argmax or crossing");

  std::map<int, ThresholdDecision> thresholds;
  for (const auto& [cls, samples] : scores)
    thresholds[cls] = threshold_from_scores(samples, EmConfig{}, opts.fallback, rule);
  io::write_file(opts.out_path, io::thresholds_to_json(thresholds).dump(2) + "\n");
  return kOk;
}

int cmd_eval(const EvalOptionsCli& opts) {
  const auto preds = io::detections_from_json(parse_json_file(opts.preds_path));
  const auto gts = io::ground_truths_from_json(parse_json_file(opts.gts_path));
  const EvalResult result = map_50_95(preds, gts);
  io::write_file(opts.out_path, io::eval_result_to_json(result).dump(2) + "\n");
  return kOk;
}

int cmd_simulate(const SimulateOptions& opts) {
  io::SimFileConfig cfg = io::sim_config_from_text(io::read_file(opts.config_path));
  if (cfg.schedules.size() < 2)
    throw DomainError("simulate: config must define at least two schedules");
  cfg.world.seed = opts.seed;
  const World world = generate_world(cfg.world);
  const CompareResult result = compare_schedules(world, cfg.skill, cfg.schedules, cfg.steps,
                                                 cfg.checkpoint_every, opts.seed);
  std::filesystem::create_directories(opts.out_dir);
  for (const RunMetrics& run : result.runs)
    io::write_file(opts.out_dir / (run.schedule_name + ".csv"), run_metrics_csv(run));
  io::write_file(opts.out_dir / "summary.csv", summary_csv(result.summary));
  return kOk;
}

int cmd_fam3d_demo(const Fam3dOptions& opts) {
  const FeaturePyramid pyramid = io::pyramid_from_json(parse_json_file(opts.pyramid_path));
  const OffsetField offsets = io::offsets_from_json(parse_json_file(opts.offsets_path));
  const FeaturePyramid out = fam3d(pyramid, offsets);
  io::write_file(opts.out_path, io::pyramid_to_json(out).dump(2) + "\n");
  return kOk;
}

int run_guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const DegenerateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDegenerateError;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariantError;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariantError;
  }
}

}  // namespace pseudolab::cli
