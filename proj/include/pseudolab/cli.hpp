#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pseudolab::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 2;       // unreadable/malformed input
inline constexpr int kInvariantError = 3;   // violated invariant or precondition
inline constexpr int kDegenerateError = 4;  // well-formed input, undefined computation

struct AssignOptions {
  std::filesystem::path scene_path;
  std::filesystem::path out_path;
  std::string assigner = "asa";
  int k = 13;
  double lambda_reg = 2.0;
  double lambda_dist = 0.001;
};

struct AiouOptions {
  std::filesystem::path scene_path;
  std::filesystem::path out_path;
  std::vector<double> rhos{0.1, 0.2, 0.3, 0.4, 0.5};
  int trials = 100;
  std::vector<std::string> assigners{"iou", "atss", "asa"};
  std::uint64_t seed = 0;
};

struct GmmOptions {
  std::filesystem::path scores_path;
  std::filesystem::path out_path;
  double fallback = 0.4;
  std::string rule = "argmax";
};

struct EvalOptionsCli {
  std::filesystem::path preds_path;
  std::filesystem::path gts_path;
  std::filesystem::path out_path;
};

struct SimulateOptions {
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
};

struct Fam3dOptions {
  std::filesystem::path pyramid_path;
  std::filesystem::path offsets_path;
  std::filesystem::path out_path;
};

int cmd_assign(const AssignOptions& opts);
int cmd_aiou(const AiouOptions& opts);
int cmd_gmm(const GmmOptions& opts);
int cmd_eval(const EvalOptionsCli& opts);
int cmd_simulate(const SimulateOptions& opts);
int cmd_fam3d_demo(const Fam3dOptions& opts);

/// Runs fn() and maps thrown errors onto the exit-code contract above.
int run_guarded(const std::function<int()>& fn);

}  // namespace pseudolab::cli
