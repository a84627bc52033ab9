#include "refill3d/pipeline.hpp"

#include <stdexcept>

#include "refill3d/sampler.hpp"

namespace refill3d {

PipelineResult run_pipeline(const ImageF& target, const MaskImage& hole_mask,
                            const ImageF& reference, const DepthMap& depth,
                            const Intrinsics& k,
                            const PipelineOptions& options) {
  if (!target.same_size(reference))
    throw std::invalid_argument("run_pipeline: target/reference size mismatch");
  if (hole_mask.width() != target.width() ||
      hole_mask.height() != target.height() ||
      depth.width() != target.width() || depth.height() != target.height())
    throw std::invalid_argument("run_pipeline: mask/depth size mismatch");

  PipelineResult out;

  if (options.skip_3d) {
    out.align3d.pose = options.align3d.initial_pose;
    PixelFlow flow = reproject_grid(depth, out.align3d.pose, k);
    auto warped = warp_image(reference, flow);
    out.align3d.coarse = std::move(warped.first);
    out.align3d.valid = std::move(warped.second);
    out.align3d.final_loss = photometric_loss_3d(
        out.align3d.pose, target, hole_mask, reference, depth, k,
        options.align3d.charbonnier_eps);
  } else {
    out.align3d = align_3d(target, hole_mask, reference, depth, k,
                           options.align3d);
  }

  const int radius =
      options.align2d.dilation_radius >= 0
          ? options.align2d.dilation_radius
          : default_dilation_radius(target.width(), target.height());
  const MaskImage dilated = dilate_mask(hole_mask, radius);

  if (options.skip_2d) {
    out.align2d.transform = ScaledEuclidean2D::identity();
    out.align2d.fine = out.align3d.coarse;
    out.align2d.valid = out.align3d.valid;
    out.align2d.refinement_skipped = true;
    out.align2d.final_loss = ring_loss_2d(
        out.align2d.transform, target, hole_mask, dilated,
        out.align3d.coarse, out.align3d.valid, options.align2d.charbonnier_eps);
  } else {
    out.align2d = align_2d(target, hole_mask, out.align3d.coarse,
                           out.align3d.valid, options.align2d);
    // Resampling by the refinement transform shaves a sliver off the
    // coarse validity boundary; those pixels still have coarse content,
    // so keep it rather than dropping them to zero.
    for (int y = 0; y < target.height(); ++y)
      for (int x = 0; x < target.width(); ++x) {
        if (out.align2d.valid.at(x, y) || !out.align3d.valid.at(x, y))
          continue;
        for (int c = 0; c < target.channels(); ++c)
          out.align2d.fine.at(x, y, c) = out.align3d.coarse.at(x, y, c);
        out.align2d.valid.at(x, y) = 1;
      }
  }

  out.fill_report.filled = fill(target, hole_mask, out.align2d.fine);
  out.fill_report.coverage = hole_coverage(hole_mask, out.align2d.valid);

  if (options.skip_harmonize) {
    out.result = out.fill_report.filled;
  } else {
    const HarmonizeResult h = harmonize(out.align2d.fine, target, hole_mask,
                                        dilated, out.align2d.valid);
    out.fill_report.harmonization_gain = h.gain;
    out.fill_report.harmonization_bias = h.bias;
    out.result = compose_final(target, hole_mask, h.image);
  }

  if (options.ground_truth) {
    const ImageF& gt = *options.ground_truth;
    if (!gt.same_size(target))
      throw std::invalid_argument("run_pipeline: ground truth size mismatch");
    MaskImage hole_region(hole_mask.width(), hole_mask.height(), 0);
    for (size_t i = 0; i < hole_mask.data().size(); ++i)
      hole_region.data()[i] = hole_mask.data()[i] ? 0 : 1;

    out.metrics.psnr = psnr(out.result, gt);
    out.metrics.ssim = ssim(out.result, gt);
    out.metrics.masked_psnr = hole_region.count_ones() > 0
                                  ? psnr(out.result, gt, hole_region)
                                  : out.metrics.psnr;
    out.metrics.valid_ratio = valid_ratio(out.align3d.valid);
    out.metrics.coverage = out.fill_report.coverage;
    out.has_metrics = true;
  }
  return out;
}

}  // namespace refill3d
