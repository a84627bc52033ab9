#pragma once

#include <cstdint>
#include <string>

namespace refill3d {

// Everything the command line can configure, with the documented defaults.
struct RunConfig {
  std::string target_path;
  std::string reference_path;
  std::string depth_path;
  std::string mask_path;
  std::string intrinsics_path;  // optional JSON; overrides --focal
  std::string gt_path;          // optional ground truth for metrics
  std::string pred_path;        // eval subject
  std::string out_dir;

  double focal = 750.0;
  int levels = 4;
  int max_iters = 200;
  bool skip_2d = false;
  bool skip_harmonize = false;
  int dilation_radius = -1;  // negative -> size-proportional default
  uint64_t seed = 0;

  // Pair generation.
  int synth_size = 512;
  double synth_hole_fraction = 0.10;
};

// Exit codes shared by every subcommand: 0 success, 1 unusable input files
// (message names the path), 2 alignment failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 1;
inline constexpr int kExitAlignmentFailed = 2;

// Pose and refinement only: writes coarse.png, fine.png, valid.png,
// pose.json, se2.json into out_dir.
int cmd_align(const RunConfig& cfg);

// Full completion: align outputs plus filled.png, result.png, metrics.json.
int cmd_fill(const RunConfig& cfg);

// Renders a reproducible evaluation pair (images, depths, poses, mask,
// intrinsics, scene description) into out_dir.
int cmd_synth(const RunConfig& cfg);

// Metrics between a prediction and its ground truth; prints the report and
// writes metrics.json when out_dir is given.
int cmd_eval(const RunConfig& cfg);

}  // namespace refill3d
