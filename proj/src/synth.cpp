#include "refill3d/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "refill3d/parallel.hpp"

namespace refill3d {

namespace {

constexpr double kTwoPi = 6.283185307179586;

struct Octave {
  Vec3 dir;
  double freq;                    // 2*pi / wavelength
  std::array<double, 3> phase;    // per channel
  double amp;
};

// Octave parameters derived from the texture id alone, so a texture looks
// the same from any viewpoint. Wavelengths step down roughly 3.5x per
// octave; amplitudes sum to < 0.5 which keeps colors inside [0, 1].
std::array<Octave, 3> texture_octaves(int texture, double scale) {
  const double base_wavelength[3] = {1.9, 0.55, 0.16};
  const double amp[3] = {0.22, 0.16, 0.10};
  std::array<Octave, 3> oct;
  for (int k = 0; k < 3; ++k) {
    const uint64_t seed =
        splitmix64(static_cast<uint64_t>(texture) * 1000003ull + k);
    const double azimuth = kTwoPi * unit_interval(splitmix64(seed + 1));
    const double dz = 0.7 * unit_interval(splitmix64(seed + 2)) - 0.35;
    const double r = std::sqrt(1.0 - dz * dz);
    oct[k].dir = {r * std::cos(azimuth), r * std::sin(azimuth), dz};
    const double jitter = 0.85 + 0.3 * unit_interval(splitmix64(seed + 3));
    oct[k].freq = kTwoPi / (base_wavelength[k] * scale * jitter);
    for (int c = 0; c < 3; ++c)
      oct[k].phase[c] = kTwoPi * unit_interval(splitmix64(seed + 4 + c));
    oct[k].amp = amp[k];
  }
  return oct;
}

}  // namespace

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

PlaneScene PlaneScene::default_scene() {
  PlaneScene s;
  Plane p;
  p.n = Vec3{0.22, -0.14, 1.0}.normalized();
  p.c = 3.1;
  p.texture = 0;
  p.scale = 1.0;
  s.planes.push_back(p);
  return s;
}

std::array<double, 3> plane_texture(const Plane& plane, const Vec3& world) {
  const auto oct = texture_octaves(plane.texture, plane.scale);
  std::array<double, 3> out{0.5, 0.5, 0.5};
  for (const Octave& o : oct) {
    const double t = o.freq * o.dir.dot(world);
    for (int c = 0; c < 3; ++c) out[c] += o.amp * std::sin(t + o.phase[c]);
  }
  return out;
}

RenderedView render(const PlaneScene& scene, const Pose6D& pose_world_to_cam,
                    const Intrinsics& k, int width, int height) {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("render: invalid image size");
  RenderedView view{ImageF(width, height, 3), DepthMap(width, height),
                    pose_world_to_cam, k};

  const Mat3 r = euler_to_rotation(pose_world_to_cam.euler_xyz);
  const Mat3 rt = r.transposed();
  const Vec3 t{pose_world_to_cam.translation[0],
               pose_world_to_cam.translation[1],
               pose_world_to_cam.translation[2]};
  const Vec3 origin = rt * t * -1.0;  // camera center in world coordinates

  // Cache the per-plane octave tables once instead of per pixel.
  std::vector<std::array<Octave, 3>> octaves;
  octaves.reserve(scene.planes.size());
  for (const Plane& p : scene.planes)
    octaves.push_back(texture_octaves(p.texture, p.scale));

  par::for_rows(height, [&](int y) {
    for (int x = 0; x < width; ++x) {
      // Ray through the pixel center; camera-frame z component is 1, so the
      // ray parameter of a hit equals its camera-frame depth.
      const Vec3 dir_cam{(x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0};
      const Vec3 dir = rt * dir_cam;

      double best = std::numeric_limits<double>::infinity();
      int hit = -1;
      for (size_t pi = 0; pi < scene.planes.size(); ++pi) {
        const Plane& p = scene.planes[pi];
        const double denom = p.n.dot(dir);
        if (std::abs(denom) < 1e-12) continue;
        const double lambda = (p.c - p.n.dot(origin)) / denom;
        if (lambda > kZEpsilon && lambda < best) {
          best = lambda;
          hit = static_cast<int>(pi);
        }
      }

      if (hit < 0) {
        for (int c = 0; c < 3; ++c)
          view.image.at(x, y, c) = static_cast<float>(scene.background[c]);
        view.depth.at(x, y) = kBackgroundDepth;
        continue;
      }

      const Vec3 world = origin + dir * best;
      std::array<double, 3> color{0.5, 0.5, 0.5};
      for (const Octave& o : octaves[hit]) {
        const double phase_arg = o.freq * o.dir.dot(world);
        for (int c = 0; c < 3; ++c)
          color[c] += o.amp * std::sin(phase_arg + o.phase[c]);
      }
      for (int c = 0; c < 3; ++c)
        view.image.at(x, y, c) = static_cast<float>(color[c]);
      view.depth.at(x, y) = static_cast<float>(best);
    }
  });
  return view;
}

RenderedPair make_pair(const PlaneScene& scene, const Pose6D& base,
                       const Pose6D& delta, const Intrinsics& k, int width,
                       int height) {
  RenderedPair pair;
  pair.view1 = render(scene, base, k, width, height);
  pair.view2 = render(scene, compose_poses(delta, base), k, width, height);
  pair.gt_relative = delta;
  return pair;
}

PlaneScene random_scene(SplitmixRng& rng) {
  PlaneScene scene;
  const int n_planes = 1 + rng.range(2);
  for (int i = 0; i < n_planes; ++i) {
    Plane p;
    p.n = Vec3{rng.signed_range(0.08, 0.3), rng.signed_range(0.08, 0.3), 1.0}
              .normalized();
    p.c = rng.uniform(2.8, 3.8) + 0.6 * i;
    p.texture = static_cast<int>(rng.uniform() * 10000.0);
    p.scale = rng.uniform(0.8, 1.3);
    scene.planes.push_back(p);
  }
  return scene;
}

Pose6D random_delta(SplitmixRng& rng) {
  Pose6D d;
  d.euler_xyz = {rng.signed_range(0.05, 0.14), rng.signed_range(0.05, 0.14),
                 rng.signed_range(0.03, 0.10)};
  d.translation = {rng.signed_range(0.15, 0.50), rng.signed_range(0.10, 0.35),
                   rng.signed_range(0.05, 0.20)};
  return d;
}

MaskImage random_hole_mask(int width, int height, double fraction,
                           SplitmixRng& rng) {
  struct Ellipse {
    double cx, cy, rx, ry, phi;
  };
  std::vector<Ellipse> shapes;
  const int count = 2 + rng.range(2);
  for (int i = 0; i < count; ++i) {
    Ellipse e;
    e.cx = rng.uniform(0.2, 0.8) * width;
    e.cy = rng.uniform(0.2, 0.8) * height;
    e.rx = rng.uniform(0.06, 0.16) * width;
    e.ry = rng.uniform(0.06, 0.16) * height;
    e.phi = rng.uniform(0.0, 3.141592653589793);
    shapes.push_back(e);
  }

  const auto rasterize = [&](double scale) {
    MaskImage mask(width, height, 1);
    for (const Ellipse& e : shapes) {
      const double c = std::cos(e.phi), s = std::sin(e.phi);
      const double rx = e.rx * scale, ry = e.ry * scale;
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          const double dx = x - e.cx, dy = y - e.cy;
          const double u = (c * dx + s * dy) / rx;
          const double v = (-s * dx + c * dy) / ry;
          if (u * u + v * v <= 1.0) mask.at(x, y) = 0;
        }
      }
    }
    return mask;
  };

  double scale = 1.0;
  MaskImage mask = rasterize(scale);
  for (int i = 0; i < 8; ++i) {
    const double hole = 1.0 - static_cast<double>(mask.count_ones()) /
                                  (static_cast<double>(width) * height);
    if (std::abs(hole - fraction) < 0.005) break;
    scale *= std::sqrt(fraction / std::max(hole, 1e-4));
    mask = rasterize(scale);
  }
  return mask;
}

double overlap_ratio(const DepthMap& depth, const Pose6D& pose,
                     const Intrinsics& k) {
  const PixelFlow flow = reproject_grid(depth, pose, k);
  return static_cast<double>(flow.valid.count_ones()) /
         static_cast<double>(flow.valid.data().size());
}

namespace {

Pose6D scale_pose(const Pose6D& p, double s) {
  return {{p.euler_xyz[0] * s, p.euler_xyz[1] * s, p.euler_xyz[2] * s},
          {p.translation[0] * s, p.translation[1] * s, p.translation[2] * s}};
}

}  // namespace

Pose6D fit_to_overlap_band(const DepthMap& depth, const Intrinsics& k,
                           const Pose6D& delta) {
  double hi = 1.0;
  double ratio = overlap_ratio(depth, scale_pose(delta, hi), k);
  for (int i = 0; i < 24 && ratio > 0.80; ++i) {
    hi *= 1.6;
    ratio = overlap_ratio(depth, scale_pose(delta, hi), k);
  }
  if (ratio >= 0.60 && ratio <= 0.80) return scale_pose(delta, hi);

  double lo = 0.0;
  for (int i = 0; i < 48; ++i) {
    const double mid = 0.5 * (lo + hi);
    ratio = overlap_ratio(depth, scale_pose(delta, mid), k);
    if (ratio > 0.80)
      lo = mid;
    else if (ratio < 0.60)
      hi = mid;
    else
      return scale_pose(delta, mid);
  }
  return scale_pose(delta, 0.5 * (lo + hi));
}

}  // namespace refill3d
