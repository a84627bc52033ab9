#pragma once

#include <cstdint>
#include <vector>

#include "refill3d/geometry.hpp"
#include "refill3d/image.hpp"
#include "refill3d/mathvec.hpp"

namespace refill3d {

// Depth assigned to rays that miss every plane.
inline constexpr float kBackgroundDepth = 50.0f;

// Infinite textured plane n . X = c in world coordinates, |n| = 1.
// `texture` seeds the procedural color pattern, `scale` stretches it.
struct Plane {
  Vec3 n{0.0, 0.0, 1.0};
  double c = 3.0;
  int texture = 0;
  double scale = 1.0;
};

struct PlaneScene {
  std::vector<Plane> planes;
  std::array<double, 3> background{0.5, 0.5, 0.5};

  // One gently slanted plane a few units in front of the origin.
  static PlaneScene default_scene();
};

// Smooth procedural color at a world point: a fixed mid-gray plus three
// sinusoidal octaves whose directions, wavelengths and per-channel phases
// are hashed from the texture id. Values stay well inside [0, 1].
std::array<double, 3> plane_texture(const Plane& plane, const Vec3& world);

struct RenderedView {
  ImageF image;
  DepthMap depth;
  Pose6D pose_world_to_cam;
  Intrinsics intrinsics;
};

// Ray-casts the scene: each pixel ray hits the nearest plane (background
// color and kBackgroundDepth on a miss). Depth is camera-frame Z.
RenderedView render(const PlaneScene& scene, const Pose6D& pose_world_to_cam,
                    const Intrinsics& k, int width, int height);

struct RenderedPair {
  RenderedView view1, view2;
  // Moves view1 camera coordinates into view2 camera coordinates.
  Pose6D gt_relative;
};

// Renders the scene from `base` and from `delta` composed after `base`, so
// gt_relative equals delta exactly.
RenderedPair make_pair(const PlaneScene& scene, const Pose6D& base,
                       const Pose6D& delta, const Intrinsics& k, int width,
                       int height);

// Deterministic mixing of a 64-bit value into a well-spread 64-bit hash.
uint64_t splitmix64(uint64_t x);

// Maps a hash to a double in [0, 1).
inline double unit_interval(uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Counter-based generator: draw i of a seed is hash(seed + i * gamma).
// Self-contained so fixtures reproduce bit for bit on any platform.
struct SplitmixRng {
  uint64_t seed;
  uint64_t counter = 0;
  explicit SplitmixRng(uint64_t s) : seed(s) {}

  double uniform() {
    return unit_interval(splitmix64(seed + 0x9e3779b97f4a7c15ull * ++counter));
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double signed_range(double lo, double hi) {
    const double mag = uniform(lo, hi);
    return uniform() < 0.5 ? -mag : mag;
  }
  int range(int n) {
    const int v = static_cast<int>(uniform() * n);
    return v >= n ? n - 1 : v;
  }
};

// One or two gently tilted planes facing the camera. With two planes the
// nearer surface forms a convex envelope, so nearby viewpoints always see
// the same geometry and warping between them has no occlusion seams.
PlaneScene random_scene(SplitmixRng& rng);

// Camera motion with tilt, roll, and a translation dominated by the image
// plane; meant to be rescaled by fit_to_overlap_band.
Pose6D random_delta(SplitmixRng& rng);

// A few rotated ellipses refit multiplicatively until the hole (zero)
// region covers the requested fraction of the image.
MaskImage random_hole_mask(int width, int height, double fraction,
                           SplitmixRng& rng);

// Fraction of pixels whose reprojection under the pose stays in bounds.
double overlap_ratio(const DepthMap& depth, const Pose6D& pose,
                     const Intrinsics& k);

// Scales the motion until the overlap ratio lands in the evaluation band
// [0.60, 0.80] (grow, then bisect; the ratio shrinks as motion grows).
Pose6D fit_to_overlap_band(const DepthMap& depth, const Intrinsics& k,
                           const Pose6D& delta);

}  // namespace refill3d
