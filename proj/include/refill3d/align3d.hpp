#pragma once

#include <array>
#include <vector>

#include "refill3d/geometry.hpp"
#include "refill3d/image.hpp"

namespace refill3d {

struct Align3DConfig {
  int pyramid_levels = 4;
  int max_iters_per_level = 200;
  double step_tolerance = 1e-7;
  double charbonnier_eps = 1e-3;
  Pose6D initial_pose = Pose6D::identity();
};

struct Align3DResult {
  Pose6D pose;
  // Reference warped into the target frame at the recovered pose, full
  // resolution, with its validity mask.
  ImageF coarse;
  MaskImage valid;
  double final_loss = 0.0;
  int iterations = 0;
};

// Loss curves per pyramid level, coarsest first, for inspection.
struct OptTrace {
  struct Level {
    int width = 0, height = 0;
    std::vector<double> losses;
  };
  std::vector<Level> levels;
};

// One pyramid step: images are 2x2 box filtered, depth likewise, the known
// mask keeps a pixel only when all contributing fine pixels are known, and
// the intrinsics follow the pixel-center convention
// (f -> f/2, c -> (c - 0.5) / 2).
ImageF downscale_image(const ImageF& img);
DepthMap downscale_depth(const DepthMap& depth);
MaskImage downscale_mask(const MaskImage& mask);
Intrinsics downscale_intrinsics(const Intrinsics& k);

// Mean smoothed-L1 photometric error between the target and the reference
// warped at `pose`, over known-and-valid pixels and channels. Returns
// +infinity when fewer than 1% of the pixels qualify.
double photometric_loss_3d(const Pose6D& pose, const ImageF& target,
                           const MaskImage& known_mask, const ImageF& reference,
                           const DepthMap& depth, const Intrinsics& k,
                           double charbonnier_eps = 1e-3);

// Analytic gradient of photometric_loss_3d with respect to the six pose
// parameters (three Euler angles, then translation).
std::array<double, 6> loss_gradient_3d(const Pose6D& pose, const ImageF& target,
                                       const MaskImage& known_mask,
                                       const ImageF& reference,
                                       const DepthMap& depth,
                                       const Intrinsics& k,
                                       double charbonnier_eps = 1e-3);

// Recovers the relative pose by coarse-to-fine minimization of the
// photometric loss, then warps the reference at the final pose. known_mask
// follows the hole convention (1 = known). Throws AlignmentFailedError when
// the loss is undefined at the coarsest level's starting pose.
Align3DResult align_3d(const ImageF& target, const MaskImage& known_mask,
                       const ImageF& reference, const DepthMap& depth,
                       const Intrinsics& k, const Align3DConfig& config = {},
                       OptTrace* trace = nullptr);

}  // namespace refill3d
