#include "refill3d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "refill3d/parallel.hpp"

namespace refill3d {

Mat3 euler_to_rotation(const std::array<double, 3>& e) {
  const double ca = std::cos(e[0]), sa = std::sin(e[0]);
  const double cb = std::cos(e[1]), sb = std::sin(e[1]);
  const double cg = std::cos(e[2]), sg = std::sin(e[2]);
  Mat3 r;
  r.m = {cg * cb, cg * sb * sa - sg * ca, cg * sb * ca + sg * sa,
         sg * cb, sg * sb * sa + cg * ca, sg * sb * ca - cg * sa,
         -sb,     cb * sa,                cb * ca};
  return r;
}

Pose6D pose_from_matrix(const Mat3& rotation, const Vec3& translation) {
  Pose6D p;
  p.euler_xyz[1] = std::asin(-rotation(2, 0));
  p.euler_xyz[0] = std::atan2(rotation(2, 1), rotation(2, 2));
  p.euler_xyz[2] = std::atan2(rotation(1, 0), rotation(0, 0));
  p.translation = {translation.x, translation.y, translation.z};
  return p;
}

Pose6D Pose6D::inverse() const {
  const Mat3 r = euler_to_rotation(euler_xyz);
  const Mat3 rt = r.transposed();
  const Vec3 t{translation[0], translation[1], translation[2]};
  const Vec3 ti = rt * t * -1.0;
  return pose_from_matrix(rt, ti);
}

Vec3 backproject(double u, double v, double z, const Intrinsics& k) {
  if (!(z > 0.0) || !std::isfinite(z))
    throw std::invalid_argument("backproject: depth must be positive and finite");
  return {z * (u - k.cx) / k.fx, z * (v - k.cy) / k.fy, z};
}

Vec3 transform_point(const Vec3& p, const Pose6D& pose) {
  const Mat3 r = euler_to_rotation(pose.euler_xyz);
  const Vec3 t{pose.translation[0], pose.translation[1], pose.translation[2]};
  return r * p + t;
}

std::optional<CameraPoint> project(const Vec3& p, const Intrinsics& k) {
  if (!(p.z > kZEpsilon)) return std::nullopt;
  return CameraPoint{k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy, p.z};
}

Pose6D compose_poses(const Pose6D& second, const Pose6D& first) {
  const Mat3 r2 = euler_to_rotation(second.euler_xyz);
  const Mat3 r1 = euler_to_rotation(first.euler_xyz);
  const Vec3 t1{first.translation[0], first.translation[1],
                first.translation[2]};
  const Vec3 t2{second.translation[0], second.translation[1],
                second.translation[2]};
  return pose_from_matrix(r2 * r1, r2 * t1 + t2);
}

PixelFlow reproject_grid(const DepthMap& depth, const Pose6D& pose,
                         const Intrinsics& k) {
  const int w = depth.width(), h = depth.height();
  PixelFlow flow(w, h);
  const Mat3 r = euler_to_rotation(pose.euler_xyz);
  const Vec3 t{pose.translation[0], pose.translation[1], pose.translation[2]};
  const double umax = w - 1.0, vmax = h - 1.0;
  // Border pixels that round a hair outside the image under a no-op motion
  // stay valid; anything within this sliver is snapped onto the border.
  constexpr double kBoundsEps = 1e-9;

  par::for_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = flow.index(x, y);
      const double z = depth.at(x, y);
      const Vec3 pt{z * (x - k.cx) / k.fx, z * (y - k.cy) / k.fy, z};
      const Vec3 pr = r * pt + t;
      if (!(pr.z > kZEpsilon)) {
        flow.valid.data()[i] = 0;
        continue;
      }
      const double u = k.fx * pr.x / pr.z + k.cx;
      const double v = k.fy * pr.y / pr.z + k.cy;
      flow.depth_ref[i] = pr.z;
      if (u >= -kBoundsEps && u <= umax + kBoundsEps && v >= -kBoundsEps &&
          v <= vmax + kBoundsEps) {
        flow.u[i] = std::clamp(u, 0.0, umax);
        flow.v[i] = std::clamp(v, 0.0, vmax);
        flow.valid.data()[i] = 1;
      } else {
        flow.u[i] = u;
        flow.v[i] = v;
        flow.valid.data()[i] = 0;
      }
    }
  });
  return flow;
}

Intrinsics default_intrinsics(int width, int height, double focal) {
  if (width <= 0 || height <= 0 || !(focal > 0.0))
    throw std::invalid_argument("default_intrinsics: bad arguments");
  return {focal, focal, width / 2.0, height / 2.0};
}

}  // namespace refill3d
