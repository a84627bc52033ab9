#pragma once

#include <array>
#include <optional>
#include <utility>

#include "refill3d/geometry.hpp"
#include "refill3d/image.hpp"

namespace refill3d {

// Bilinear sample value plus its derivatives with respect to the sample
// coordinates. Only the first `channels` entries of each array are used.
struct SampleGrad {
  std::array<double, 3> value{};
  std::array<double, 3> du{};
  std::array<double, 3> dv{};
};

// Bilinear interpolation at (u, v). Exact image values at integer grid
// nodes. Empty outside [0, W-1] x [0, H-1].
std::optional<std::array<double, 3>> bilinear_sample(const ImageF& img,
                                                     double u, double v);

// Same sample together with d/du and d/dv of the interpolant (constant
// within each grid cell).
std::optional<SampleGrad> bilinear_sample_grad(const ImageF& img, double u,
                                               double v);

// Pulls reference content through the flow: output(p) = reference(flow(p))
// where the flow is valid, black elsewhere. The returned mask equals
// flow.valid. Throws std::invalid_argument when reference and flow
// dimensions differ.
std::pair<ImageF, MaskImage> warp_image(const ImageF& reference,
                                        const PixelFlow& flow);

// Grows the zero (hole) region of a mask by a Euclidean disk of the given
// pixel radius. radius 0 returns a copy. Throws std::invalid_argument for
// negative radius.
MaskImage dilate_mask(const MaskImage& mask, int radius);

}  // namespace refill3d
