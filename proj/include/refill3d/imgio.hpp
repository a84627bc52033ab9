#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "refill3d/image.hpp"

namespace refill3d {

// Loads an 8- or 16-bit grayscale or RGB PNG into floats in [0, 1].
// Anything else (palette, alpha, low bit depths) raises IoError naming the
// path.
ImageF load_png(const std::string& path);

// Writes an 8-bit grayscale or RGB PNG. Values are clamped to [0, 1] and
// rounded; encoder settings are fixed so identical images produce identical
// files.
void save_png(const std::string& path, const ImageF& img);

// Grayscale PFM ("Pf"). The scale sign selects endianness; rows are stored
// bottom to top. Loads reject non-positive or non-finite depths.
DepthMap load_pfm(const std::string& path);
void save_pfm(const std::string& path, const DepthMap& depth);

// 8-bit grayscale PNG thresholded at 128: below -> 0 (hole), at or above
// -> 1 (known). Non-grayscale or 16-bit input raises IoError.
MaskImage load_mask(const std::string& path);

// Writes a mask as an 8-bit grayscale PNG with values 0 and 255.
void save_mask(const std::string& path, const MaskImage& mask);

// Everything one run may emit; absent members are skipped.
struct OutputBundle {
  std::optional<ImageF> coarse, fine, filled, result;
  std::optional<MaskImage> valid;
  std::optional<nlohmann::json> pose, se2, metrics;
};

// Writes the bundle under fixed names (coarse.png, fine.png, valid.png,
// filled.png, result.png, pose.json, se2.json, metrics.json), creating the
// directory when needed. Returns the paths written, in that order.
std::vector<std::string> save_outputs(const std::string& dir,
                                      const OutputBundle& bundle);

}  // namespace refill3d
