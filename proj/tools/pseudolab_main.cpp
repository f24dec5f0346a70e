#include <CLI11.hpp>

#include "pseudolab/cli.hpp"

using namespace pseudolab;

int main(int argc, char** argv) {
  CLI::App app{"pseudolab: pseudo-label pipeline toolkit (assignment, FAM-3D resampling, "
               "GMM thresholding, mAP diagnostics, teacher-dynamics simulation)"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Global seed; every internal stream derives from it")
      ->capture_default_str();

  cli::AssignOptions assign_opts;
  CLI::App* assign = app.add_subcommand("assign", "Run one label assigner on a scene file");
  assign->add_option("scene", assign_opts.scene_path, "Scene JSON")->required();
  assign->add_option("-o,--out", assign_opts.out_path, "Output assignments JSON")->required();
  assign->add_option("--assigner", assign_opts.assigner, "iou|atss|asa")->capture_default_str();
  assign->add_option("--k", assign_opts.k, "ASA top-K per ground truth")->capture_default_str();
  assign->add_option("--lambda-reg", assign_opts.lambda_reg, "ASA regression cost weight")
      ->capture_default_str();
  assign->add_option("--lambda-dist", assign_opts.lambda_dist, "ASA center-prior weight")
      ->capture_default_str();

  cli::AiouOptions aiou_opts;
  CLI::App* aiou = app.add_subcommand("aiou", "Assignment noise-robustness experiment (CSV)");
  aiou->add_option("scene", aiou_opts.scene_path, "Scene JSON")->required();
  aiou->add_option("-o,--out", aiou_opts.out_path, "Output CSV")->required();
  aiou->add_option("--rhos", aiou_opts.rhos, "Noise ratios")->delimiter(',')->capture_default_str();
  aiou->add_option("--trials", aiou_opts.trials, "Trials per rho")->capture_default_str();
  aiou->add_option("--assigners", aiou_opts.assigners, "Comma-separated assigner names")
      ->delimiter(',')
      ->capture_default_str();

  cli::GmmOptions gmm_opts;
  CLI::App* gmm = app.add_subcommand("gmm", "Fit per-class mixtures and derive thresholds");
  gmm->add_option("scores", gmm_opts.scores_path, "Scores JSON")->required();
  gmm->add_option("-o,--out", gmm_opts.out_path, "Output thresholds JSON")->required();
  gmm->add_option("--fallback", gmm_opts.fallback, "Threshold when the fit degenerates")
      ->capture_default_str();
  gmm->add_option("--rule", gmm_opts.rule, "argmax|crossing")->capture_default_str();

  cli::EvalOptionsCli eval_opts;
  CLI::App* eval = app.add_subcommand("eval", "COCO-style mAP of predictions vs ground truth");
  eval->add_option("preds", eval_opts.preds_path, "Predictions JSON")->required();
  eval->add_option("gts", eval_opts.gts_path, "Ground-truth JSON")->required();
  eval->add_option("-o,--out", eval_opts.out_path, "Output metrics JSON")->required();

  cli::SimulateOptions sim_opts;
  CLI::App* sim = app.add_subcommand("simulate", "Teacher-dynamics threshold-schedule comparison");
  sim->add_option("config", sim_opts.config_path, "Simulation config file")->required();
  sim->add_option("-o,--out-dir", sim_opts.out_dir, "Output directory for metric CSVs")->required();

  cli::Fam3dOptions fam_opts;
  CLI::App* fam = app.add_subcommand("fam3d-demo", "Resample a feature pyramid by an offset field");
  fam->add_option("pyramid", fam_opts.pyramid_path, "Pyramid JSON")->required();
  fam->add_option("offsets", fam_opts.offsets_path, "Offsets JSON (3-channel pyramid schema)")->required();
  fam->add_option("-o,--out", fam_opts.out_path, "Output pyramid JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kInputError;
  }

  return cli::run_guarded([&]() -> int {
    if (assign->parsed()) return cli::cmd_assign(assign_opts);
    if (aiou->parsed()) {
      aiou_opts.seed = seed;
      return cli::cmd_aiou(aiou_opts);
    }
    if (gmm->parsed()) return cli::cmd_gmm(gmm_opts);
    if (eval->parsed()) return cli::cmd_eval(eval_opts);
    if (sim->parsed()) {
      sim_opts.seed = seed;
      return cli::cmd_simulate(sim_opts);
    }
    if (fam->parsed()) return cli::cmd_fam3d_demo(fam_opts);
    return cli::kInputError;
  });
}
