#pragma once

#include <array>

#include "refill3d/image.hpp"

namespace refill3d {

// Copies hole pixels (mask 0) from `fine` into `target`; known pixels are
// taken from the target unchanged, bit for bit.
ImageF fill(const ImageF& target, const MaskImage& hole_mask,
            const ImageF& fine);

struct HarmonizeResult {
  ImageF image;
  std::array<double, 3> gain{1.0, 1.0, 1.0};
  std::array<double, 3> bias{0.0, 0.0, 0.0};
  // Set when no ring pixel was usable; gain/bias stay identity.
  bool ring_empty = false;
};

// Least-squares per-channel gain and bias matching the fine image to the
// target over the ring (known pixels inside the dilated hole neighborhood
// where the fine image is valid). Gain is clamped to [0.5, 2.0] with the
// bias refit afterwards; the correction is applied to the whole fine image
// and clamped to [0, 1].
HarmonizeResult harmonize(const ImageF& fine, const ImageF& target,
                          const MaskImage& hole_mask,
                          const MaskImage& dilated_mask,
                          const MaskImage& fine_valid);

// Final composite: target where known, harmonized fine inside the hole.
ImageF compose_final(const ImageF& target, const MaskImage& hole_mask,
                     const ImageF& harmonized_fine);

// Fraction of hole pixels carrying valid aligned content; 1.0 when the mask
// has no hole.
double hole_coverage(const MaskImage& hole_mask, const MaskImage& valid);

}  // namespace refill3d
