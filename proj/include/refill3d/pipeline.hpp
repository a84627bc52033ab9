#pragma once

#include <array>

#include "refill3d/align2d.hpp"
#include "refill3d/align3d.hpp"
#include "refill3d/compose.hpp"
#include "refill3d/metrics.hpp"

namespace refill3d {

struct PipelineOptions {
  Align3DConfig align3d;
  Align2DConfig align2d;
  // Stage toggles for ablations: skip_3d keeps the identity pose (the raw
  // reference stands in for the warped one), skip_2d keeps the coarse
  // result, skip_harmonize composites the fine image unchanged.
  bool skip_3d = false;
  bool skip_2d = false;
  bool skip_harmonize = false;
  // When set, a metrics report against this ground truth is produced.
  const ImageF* ground_truth = nullptr;
};

struct FillReport {
  ImageF filled;  // hole filled from the aligned reference, no harmonization
  double coverage = 0.0;
  std::array<double, 3> harmonization_gain{1.0, 1.0, 1.0};
  std::array<double, 3> harmonization_bias{0.0, 0.0, 0.0};
};

struct PipelineResult {
  Align3DResult align3d;
  Align2DResult align2d;
  FillReport fill_report;
  ImageF result;  // final composite with harmonization applied
  bool has_metrics = false;
  MetricsReport metrics;
};

// Full path from a masked target and a reference with target depth to the
// completed image: 3D alignment, 2D refinement, hole fill, harmonization.
// hole_mask uses 1 = known. Throws AlignmentFailedError when the 3D stage
// cannot start and std::invalid_argument on dimension mismatches.
PipelineResult run_pipeline(const ImageF& target, const MaskImage& hole_mask,
                            const ImageF& reference, const DepthMap& depth,
                            const Intrinsics& k,
                            const PipelineOptions& options = {});

}  // namespace refill3d
