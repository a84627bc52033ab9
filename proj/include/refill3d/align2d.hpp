#pragma once

#include <array>
#include <utility>
#include <vector>

#include "refill3d/image.hpp"

namespace refill3d {

// Similarity transform of pixel coordinates:
// (u, v) -> (s cos(theta) u - s sin(theta) v + tx,
//            s sin(theta) u + s cos(theta) v + ty).
struct ScaledEuclidean2D {
  double theta = 0.0;
  double tx = 0.0, ty = 0.0;
  double s = 1.0;

  static ScaledEuclidean2D identity() { return {}; }
  ScaledEuclidean2D inverse() const;

  friend bool operator==(const ScaledEuclidean2D&,
                         const ScaledEuclidean2D&) = default;
};

std::array<double, 2> apply_se2(const ScaledEuclidean2D& t, double u, double v);

struct Align2DConfig {
  int max_iters = 100;
  double step_tolerance = 1e-7;
  double charbonnier_eps = 1e-3;
  // Hole dilation radius in pixels; negative selects the size-proportional
  // default round(15 * min(H, W) / 512).
  int dilation_radius = -1;
};

struct Align2DResult {
  ScaledEuclidean2D transform;
  ImageF fine;
  MaskImage valid;
  double final_loss = 0.0;
  int iterations = 0;
  // Set when the ring was empty or unusable, in which case transform is the
  // identity and fine/valid are the untouched inputs.
  bool refinement_skipped = false;
};

int default_dilation_radius(int width, int height);

// Resamples an image under the transform (output(p) = input(t^-1 p),
// bilinear). A result pixel is valid when it lands inside the bounds and
// every input pixel it reads is valid. The identity transform returns
// bit-exact copies.
std::pair<ImageF, MaskImage> resample_se2(const ImageF& img,
                                          const MaskImage& valid,
                                          const ScaledEuclidean2D& t);

// Mean smoothed-L1 error between target and the resampled coarse image over
// the ring (pixels known in the target but inside the dilated hole
// neighborhood), restricted to where the resampled image is valid. Returns
// +infinity when no pixel qualifies.
double ring_loss_2d(const ScaledEuclidean2D& t, const ImageF& target,
                    const MaskImage& known_mask, const MaskImage& dilated_known,
                    const ImageF& coarse, const MaskImage& coarse_valid,
                    double charbonnier_eps = 1e-3);

// Analytic gradient of ring_loss_2d with respect to (theta, tx, ty, s).
std::array<double, 4> ring_loss_grad_2d(const ScaledEuclidean2D& t,
                                        const ImageF& target,
                                        const MaskImage& known_mask,
                                        const MaskImage& dilated_known,
                                        const ImageF& coarse,
                                        const MaskImage& coarse_valid,
                                        double charbonnier_eps = 1e-3);

// Refines the warped reference against the target around the hole by
// minimizing the ring loss from the identity transform, then resamples.
// Never returns a transform whose ring loss exceeds the identity's; when
// nothing qualifies the input is passed through and the result is flagged.
Align2DResult align_2d(const ImageF& target, const MaskImage& known_mask,
                       const ImageF& coarse, const MaskImage& coarse_valid,
                       const Align2DConfig& config = {},
                       std::vector<double>* loss_history = nullptr);

}  // namespace refill3d
