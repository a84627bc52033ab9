#pragma once

#include "refill3d/image.hpp"

namespace refill3d {

// Quality summary for one result against its ground truth.
struct MetricsReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double masked_psnr = 0.0;
  double valid_ratio = 0.0;
  double coverage = 0.0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Peak signal-to-noise ratio in dB for images with peak value 1.0, capped at
// 99 (also returned for identical images). Throws std::invalid_argument on
// size mismatch.
double psnr(const ImageF& a, const ImageF& b);

// PSNR restricted to pixels where region == 1. Throws std::invalid_argument
// when the region is empty or sizes mismatch.
double psnr(const ImageF& a, const ImageF& b, const MaskImage& region);

// Mean structural similarity over all fully interior 11x11 Gaussian windows
// (sigma 1.5, stabilizers from peak 1.0), averaged across channels. Images
// smaller than the window throw std::invalid_argument.
double ssim(const ImageF& a, const ImageF& b);

// Fraction of mask pixels equal to 1.
double valid_ratio(const MaskImage& mask);

// Reprojection-overlap acceptance band used when generating evaluation
// pairs: [0.60, 0.80] inclusive.
bool valid_ratio_accepts(double ratio);

enum class MaskAreaClass { Small, Large, OutOfBand };

// Buckets a hole mask by hole fraction (share of zero pixels):
// [0.05, 0.15] -> Small, (0.15, 0.30] -> Large, anything else OutOfBand.
MaskAreaClass mask_area_class(const MaskImage& hole_mask);

}  // namespace refill3d
