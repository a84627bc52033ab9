#pragma once

#include <array>
#include <optional>
#include <vector>

#include "refill3d/image.hpp"
#include "refill3d/mathvec.hpp"

namespace refill3d {

// Points closer to the camera plane than this are treated as behind the
// camera and never projected.
inline constexpr double kZEpsilon = 1e-6;

// Pinhole camera: focal lengths and principal point in pixels.
struct Intrinsics {
  double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

// Rigid camera motion. Rotation is stored as intrinsic-parameter Euler
// angles (radians) applied in x, y, z order, i.e. R = Rz(g) * Ry(b) * Rx(a).
struct Pose6D {
  std::array<double, 3> euler_xyz{0.0, 0.0, 0.0};
  std::array<double, 3> translation{0.0, 0.0, 0.0};

  static Pose6D identity() { return {}; }
  Pose6D inverse() const;

  friend bool operator==(const Pose6D&, const Pose6D&) = default;
};

// A 3D point expressed in a camera frame, plus its pixel projection.
struct CameraPoint {
  double u = 0.0, v = 0.0, z = 0.0;
};

// Dense per-pixel correspondence field: for every target pixel the
// coordinates it maps to in the reference image, the depth in the reference
// camera frame, and a validity bit (in front of the camera and inside the
// image bounds). Out-of-bounds coordinates are stored as-is; behind-camera
// pixels keep zeros.
struct PixelFlow {
  int width = 0, height = 0;
  std::vector<double> u, v;
  std::vector<double> depth_ref;
  MaskImage valid;

  PixelFlow() = default;
  PixelFlow(int w, int h)
      : width(w),
        height(h),
        u(static_cast<size_t>(w) * h, 0.0),
        v(static_cast<size_t>(w) * h, 0.0),
        depth_ref(static_cast<size_t>(w) * h, 0.0),
        valid(w, h, 0) {}

  size_t index(int x, int y) const {
    return static_cast<size_t>(y) * width + x;
  }
};

// R = Rz(euler[2]) * Ry(euler[1]) * Rx(euler[0]).
Mat3 euler_to_rotation(const std::array<double, 3>& euler_xyz);

// Recovers x-y-z Euler angles and translation from a rotation matrix and
// translation vector. Assumes |pitch| < pi/2 (away from gimbal lock).
Pose6D pose_from_matrix(const Mat3& rotation, const Vec3& translation);

// Lifts pixel (u, v) with depth z to a 3D point in the camera frame.
// Throws std::invalid_argument for non-positive or non-finite depth.
Vec3 backproject(double u, double v, double z, const Intrinsics& k);

// R * p + t.
Vec3 transform_point(const Vec3& p, const Pose6D& pose);

// Perspective projection to pixel coordinates. Empty when the point lies
// behind the camera (z <= kZEpsilon).
std::optional<CameraPoint> project(const Vec3& p, const Intrinsics& k);

// second after first: p -> second(first(p)).
Pose6D compose_poses(const Pose6D& second, const Pose6D& first);

// Backprojects every pixel of the depth grid, moves it by the pose, and
// projects it into the reference view. A pixel is valid when its moved point
// is in front of the camera and its projection lands inside
// [0, W-1] x [0, H-1].
PixelFlow reproject_grid(const DepthMap& depth, const Pose6D& pose,
                         const Intrinsics& k);

// Principal point at the image center, square pixels.
Intrinsics default_intrinsics(int width, int height, double focal);

}  // namespace refill3d
