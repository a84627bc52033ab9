#include "refill3d/align3d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "refill3d/detail/optim.hpp"
#include "refill3d/errors.hpp"
#include "refill3d/parallel.hpp"
#include "refill3d/sampler.hpp"

namespace refill3d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int half(int n) { return (n + 1) / 2; }

// Fine pixels covered by coarse pixel (x, y): columns 2x..2x+1 and rows
// 2y..2y+1, trimmed at the border for odd sizes.
template <class Fn>
void for_block(int x, int y, int fine_w, int fine_h, const Fn& fn) {
  const int x0 = 2 * x, y0 = 2 * y;
  const int x1 = std::min(x0 + 2, fine_w), y1 = std::min(y0 + 2, fine_h);
  for (int fy = y0; fy < y1; ++fy)
    for (int fx = x0; fx < x1; ++fx) fn(fx, fy);
}

struct Level {
  ImageF target;
  MaskImage known;
  ImageF reference;
  DepthMap depth;
  Intrinsics k;
};

// Derivatives of the rotation matrix with respect to each Euler angle.
struct RotationDerivs {
  Mat3 r;
  std::array<Mat3, 3> dr;
};

RotationDerivs rotation_with_derivs(const std::array<double, 3>& e) {
  const double ca = std::cos(e[0]), sa = std::sin(e[0]);
  const double cb = std::cos(e[1]), sb = std::sin(e[1]);
  const double cg = std::cos(e[2]), sg = std::sin(e[2]);

  Mat3 rx{{1, 0, 0, 0, ca, -sa, 0, sa, ca}};
  Mat3 ry{{cb, 0, sb, 0, 1, 0, -sb, 0, cb}};
  Mat3 rz{{cg, -sg, 0, sg, cg, 0, 0, 0, 1}};
  Mat3 drx{{0, 0, 0, 0, -sa, -ca, 0, ca, -sa}};
  Mat3 dry{{-sb, 0, cb, 0, 0, 0, -cb, 0, -sb}};
  Mat3 drz{{-sg, -cg, 0, cg, -sg, 0, 0, 0, 0}};

  RotationDerivs out;
  out.r = rz * ry * rx;
  out.dr[0] = rz * ry * drx;
  out.dr[1] = rz * dry * rx;
  out.dr[2] = drz * ry * rx;
  return out;
}

Pose6D pose_from_params(const std::array<double, 6>& p) {
  return Pose6D{{p[0], p[1], p[2]}, {p[3], p[4], p[5]}};
}

std::array<double, 6> params_from_pose(const Pose6D& p) {
  return {p.euler_xyz[0], p.euler_xyz[1], p.euler_xyz[2],
          p.translation[0], p.translation[1], p.translation[2]};
}

// Candidate starting points for the coarsest level. Descent only converges
// from within about half a texture wavelength, while supported camera
// motions displace the image by several times that, so the start matters
// more than the polish. Candidates shift the initial translation by pixel
// offsets on a grid (converted to world units via the mean known depth);
// in-plane translation stands in for pitch and yaw as well, since both
// move the image almost identically at these fields of view. Roll and
// forward translation have no such stand-in — they rotate or scale the
// image about its center — so the grid is crossed with a few offsets along
// each. The base pose comes first so exact ties resolve to the configured
// start.
std::vector<std::array<double, 6>> coarse_start_candidates(
    const Level& lv, const std::array<double, 6>& base) {
  double depth_sum = 0.0;
  long known = 0;
  for (int y = 0; y < lv.depth.height(); ++y)
    for (int x = 0; x < lv.depth.width(); ++x)
      if (lv.known.at(x, y)) {
        depth_sum += lv.depth.at(x, y);
        ++known;
      }
  std::vector<std::array<double, 6>> out{base};
  if (known == 0) return out;
  const double mean_depth = depth_sum / known;

  const double step =
      std::max(2.0, std::min(lv.target.width(), lv.target.height()) / 10.0);
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -6; dy <= 6; ++dy)
    for (int dx = -6; dx <= 6; ++dx)
      offsets.emplace_back(dx, dy);
  std::sort(offsets.begin(), offsets.end(), [](const auto& a, const auto& b) {
    const int ra = a.first * a.first + a.second * a.second;
    const int rb = b.first * b.first + b.second * b.second;
    if (ra != rb) return ra < rb;
    return a < b;
  });
  const double rolls[] = {0.0, 0.07, -0.07, 0.15, -0.15};
  const double advances[] = {0.0, 0.12, -0.12, 0.25, -0.25};
  for (const double roll : rolls)
    for (const double advance : advances)
      for (const auto& [dx, dy] : offsets) {
        if (dx == 0 && dy == 0 && roll == 0.0 && advance == 0.0) continue;
        std::array<double, 6> cand = base;
        cand[2] += roll;
        cand[3] += dx * step * mean_depth / lv.k.fx;
        cand[4] += dy * step * mean_depth / lv.k.fy;
        cand[5] += advance * mean_depth;
        out.push_back(cand);
      }
  return out;
}

// Per-row accumulator slots; reduced sequentially in row order afterwards so
// results do not depend on the worker count.
struct RowAccum {
  double loss = 0.0;
  long count = 0;
  std::array<double, 6> grad{};
  std::array<double, 21> hess{};  // upper triangle, row-major
};

// Single pass over one pyramid level. Always accumulates the loss; gradient
// and normal equations only when with_derivs is set, via the exact same
// per-pixel traversal so both paths produce bit-identical loss values.
detail::Objective<6> evaluate_level(const Level& lv,
                                    const std::array<double, 6>& params,
                                    double eps, bool with_derivs) {
  const int w = lv.target.width(), h = lv.target.height();
  const int ch = lv.target.channels();
  const RotationDerivs rot = rotation_with_derivs({params[0], params[1], params[2]});
  const Vec3 t{params[3], params[4], params[5]};
  const double umax = w - 1.0, vmax = h - 1.0;
  // Same validity rule as reproject_grid, border sliver included.
  constexpr double kBoundsEps = 1e-9;

  std::vector<RowAccum> rows(h);
  par::for_rows(h, [&](int y) {
    RowAccum& acc = rows[y];
    for (int x = 0; x < w; ++x) {
      if (!lv.known.at(x, y)) continue;
      const double z = lv.depth.at(x, y);
      const Vec3 pt{z * (x - lv.k.cx) / lv.k.fx, z * (y - lv.k.cy) / lv.k.fy, z};
      const Vec3 pr = rot.r * pt + t;
      if (!(pr.z > kZEpsilon)) continue;
      double u = lv.k.fx * pr.x / pr.z + lv.k.cx;
      double v = lv.k.fy * pr.y / pr.z + lv.k.cy;
      if (!(u >= -kBoundsEps && u <= umax + kBoundsEps && v >= -kBoundsEps &&
            v <= vmax + kBoundsEps))
        continue;
      u = std::clamp(u, 0.0, umax);
      v = std::clamp(v, 0.0, vmax);

      if (!with_derivs) {
        const auto s = bilinear_sample(lv.reference, u, v);
        for (int c = 0; c < ch; ++c) {
          const double d = (*s)[c] - lv.target.at(x, y, c);
          acc.loss += detail::charbonnier(d, eps);
        }
        ++acc.count;
        continue;
      }

      const auto s = bilinear_sample_grad(lv.reference, u, v);

      // Projection Jacobian rows d(u,v)/d(pr).
      const double iz = 1.0 / pr.z;
      const double ju[3] = {lv.k.fx * iz, 0.0, -lv.k.fx * pr.x * iz * iz};
      const double jv[3] = {0.0, lv.k.fy * iz, -lv.k.fy * pr.y * iz * iz};

      // d(u,v)/d(param j): angles move pr by dR_j * pt, translation by e_j.
      double du[6], dv[6];
      for (int j = 0; j < 3; ++j) {
        const Vec3 dp = rot.dr[j] * pt;
        du[j] = ju[0] * dp.x + ju[1] * dp.y + ju[2] * dp.z;
        dv[j] = jv[0] * dp.x + jv[1] * dp.y + jv[2] * dp.z;
      }
      du[3] = ju[0]; du[4] = ju[1]; du[5] = ju[2];
      dv[3] = jv[0]; dv[4] = jv[1]; dv[5] = jv[2];

      for (int c = 0; c < ch; ++c) {
        const double d = s->value[c] - lv.target.at(x, y, c);
        acc.loss += detail::charbonnier(d, eps);

        double jrow[6];
        for (int j = 0; j < 6; ++j)
          jrow[j] = s->du[c] * du[j] + s->dv[c] * dv[j];

        const double gscale = detail::charbonnier_deriv(d, eps);
        const double wgn = detail::charbonnier_weight(d, eps);
        for (int j = 0; j < 6; ++j) acc.grad[j] += gscale * jrow[j];
        int slot = 0;
        for (int j = 0; j < 6; ++j)
          for (int l = j; l < 6; ++l, ++slot)
            acc.hess[slot] += wgn * jrow[j] * jrow[l];
      }
      ++acc.count;
    }
  });

  detail::Objective<6> obj;
  double loss = 0.0;
  long count = 0;
  std::array<double, 6> grad{};
  std::array<double, 21> hess{};
  for (const RowAccum& acc : rows) {
    loss += acc.loss;
    count += acc.count;
    for (int j = 0; j < 6; ++j) grad[j] += acc.grad[j];
    for (int s = 0; s < 21; ++s) hess[s] += acc.hess[s];
  }

  const long total = static_cast<long>(w) * h;
  if (count * 100 < total) return obj;  // loss stays +infinity

  const double norm = 1.0 / (static_cast<double>(count) * ch);
  obj.loss = loss * norm;
  if (with_derivs) {
    for (int j = 0; j < 6; ++j) obj.grad[j] = grad[j] * norm;
    int slot = 0;
    for (int j = 0; j < 6; ++j)
      for (int l = j; l < 6; ++l, ++slot) {
        obj.hessian[j * 6 + l] = hess[slot] * norm;
        obj.hessian[l * 6 + j] = hess[slot] * norm;
      }
  }
  return obj;
}

}  // namespace

ImageF downscale_image(const ImageF& img) {
  const int w = half(img.width()), h = half(img.height());
  ImageF out(w, h, img.channels());
  par::for_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        double sum = 0.0;
        int n = 0;
        for_block(x, y, img.width(), img.height(), [&](int fx, int fy) {
          sum += img.at(fx, fy, c);
          ++n;
        });
        out.at(x, y, c) = static_cast<float>(sum / n);
      }
    }
  });
  return out;
}

DepthMap downscale_depth(const DepthMap& depth) {
  const int w = half(depth.width()), h = half(depth.height());
  DepthMap out(w, h);
  par::for_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      int n = 0;
      for_block(x, y, depth.width(), depth.height(), [&](int fx, int fy) {
        sum += depth.at(fx, fy);
        ++n;
      });
      out.at(x, y) = static_cast<float>(sum / n);
    }
  });
  return out;
}

MaskImage downscale_mask(const MaskImage& mask) {
  const int w = half(mask.width()), h = half(mask.height());
  MaskImage out(w, h, 0);
  par::for_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      uint8_t all = 1;
      for_block(x, y, mask.width(), mask.height(), [&](int fx, int fy) {
        if (!mask.at(fx, fy)) all = 0;
      });
      out.at(x, y) = all;
    }
  });
  return out;
}

Intrinsics downscale_intrinsics(const Intrinsics& k) {
  return {k.fx / 2.0, k.fy / 2.0, (k.cx - 0.5) / 2.0, (k.cy - 0.5) / 2.0};
}

double photometric_loss_3d(const Pose6D& pose, const ImageF& target,
                           const MaskImage& known_mask, const ImageF& reference,
                           const DepthMap& depth, const Intrinsics& k,
                           double charbonnier_eps) {
  Level lv{target, known_mask, reference, depth, k};
  return evaluate_level(lv, params_from_pose(pose), charbonnier_eps, false).loss;
}

std::array<double, 6> loss_gradient_3d(const Pose6D& pose, const ImageF& target,
                                       const MaskImage& known_mask,
                                       const ImageF& reference,
                                       const DepthMap& depth,
                                       const Intrinsics& k,
                                       double charbonnier_eps) {
  Level lv{target, known_mask, reference, depth, k};
  return evaluate_level(lv, params_from_pose(pose), charbonnier_eps, true).grad;
}

Align3DResult align_3d(const ImageF& target, const MaskImage& known_mask,
                       const ImageF& reference, const DepthMap& depth,
                       const Intrinsics& k, const Align3DConfig& config,
                       OptTrace* trace) {
  if (!target.same_size(reference))
    throw std::invalid_argument("align_3d: target/reference size mismatch");
  if (known_mask.width() != target.width() ||
      known_mask.height() != target.height() ||
      depth.width() != target.width() || depth.height() != target.height())
    throw std::invalid_argument("align_3d: mask/depth size mismatch");
  if (config.pyramid_levels < 1)
    throw std::invalid_argument("align_3d: pyramid_levels must be >= 1");

  // Finest level first, then repeated halving. Levels that would drop below
  // 8 pixels on a side are not built.
  std::vector<Level> pyramid;
  pyramid.push_back({target, known_mask, reference, depth, k});
  for (int l = 1; l < config.pyramid_levels; ++l) {
    const Level& prev = pyramid.back();
    if (half(prev.target.width()) < 8 || half(prev.target.height()) < 8) break;
    pyramid.push_back({downscale_image(prev.target),
                       downscale_mask(prev.known),
                       downscale_image(prev.reference),
                       downscale_depth(prev.depth),
                       downscale_intrinsics(prev.k)});
  }

  // The coarsest level aliases heavily, so its loss ordering does not always
  // survive refinement: a start that wins at 32 pixels can lose at full
  // resolution. A few coarse winners are therefore carried through the whole
  // pyramid as independent paths and the finest level decides. The path from
  // the configured start always survives and comes first, so exact ties
  // resolve to it.
  struct Path {
    std::array<double, 6> params;
    double loss = std::numeric_limits<double>::infinity();
    int iters = 0;
    std::vector<OptTrace::Level> trace;
  };
  std::vector<Path> paths{{params_from_pose(config.initial_pose)}};

  for (int li = static_cast<int>(pyramid.size()) - 1; li >= 0; --li) {
    const Level& lv = pyramid[li];
    const bool coarsest = li == static_cast<int>(pyramid.size()) - 1;

    detail::MinimizeOptions opt;
    opt.max_iters = config.max_iters_per_level;
    opt.step_tolerance = config.step_tolerance;

    const auto loss_at = [&](const std::array<double, 6>& p) {
      return evaluate_level(lv, p, config.charbonnier_eps, false).loss;
    };
    const auto objective_at = [&](const std::array<double, 6>& p) {
      return evaluate_level(lv, p, config.charbonnier_eps, true);
    };

    if (coarsest) {
      if (!std::isfinite(loss_at(paths[0].params)))
        throw AlignmentFailedError(
            "3d alignment failed: target and reference share no usable "
            "overlap at the coarsest pyramid level");
      std::vector<std::array<double, 6>> starts{paths[0].params};
      if (opt.max_iters > 0) {
        // Rank the grid by its raw loss and polish only the most promising
        // starts alongside the configured one. Raw loss alone would spend
        // the whole budget on near-duplicates of a single basin, so starts
        // too close (in approximate pixel displacement) to an already
        // chosen one are suppressed.
        const auto candidates = coarse_start_candidates(lv, starts[0]);
        std::vector<std::pair<double, size_t>> ranked;
        for (size_t i = 1; i < candidates.size(); ++i) {
          const double l = loss_at(candidates[i]);
          if (std::isfinite(l)) ranked.emplace_back(l, i);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });

        double depth_sum = 0.0;
        long known = 0;
        for (int y = 0; y < lv.depth.height(); ++y)
          for (int x = 0; x < lv.depth.width(); ++x)
            if (lv.known.at(x, y)) {
              depth_sum += lv.depth.at(x, y);
              ++known;
            }
        const double zbar = known > 0 ? depth_sum / known : 1.0;
        const double radius_px =
            std::min(lv.target.width(), lv.target.height()) / 2.0;
        const auto displacement_px = [&](const std::array<double, 6>& a,
                                         const std::array<double, 6>& b) {
          return std::abs(a[3] - b[3]) * lv.k.fx / zbar +
                 std::abs(a[4] - b[4]) * lv.k.fy / zbar +
                 std::abs(a[2] - b[2]) * radius_px +
                 std::abs(a[5] - b[5]) * radius_px / zbar;
        };
        const double min_separation = 1.5 * std::max(
            2.0, std::min(lv.target.width(), lv.target.height()) / 10.0);
        for (size_t r = 0; r < ranked.size() && starts.size() < 9; ++r) {
          const auto& cand = candidates[ranked[r].second];
          bool crowded = false;
          for (size_t s = 1; s < starts.size() && !crowded; ++s)
            crowded = displacement_px(cand, starts[s]) < min_separation;
          if (!crowded) starts.push_back(cand);
        }
      }

      std::vector<Path> polished;
      for (const auto& start : starts) {
        Path p{start};
        std::vector<double> history;
        auto result =
            detail::minimize<6>(start, loss_at, objective_at, opt, &history);
        if (std::isfinite(result.loss)) {
          p.params = result.params;
          p.loss = result.loss;
          p.iters = result.iterations;
        }
        p.trace.push_back(
            {lv.target.width(), lv.target.height(), std::move(history)});
        polished.push_back(std::move(p));
      }
      std::vector<size_t> order;
      for (size_t i = 1; i < polished.size(); ++i) order.push_back(i);
      std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return polished[a].loss < polished[b].loss;
      });
      paths.clear();
      paths.push_back(std::move(polished[0]));
      for (size_t r = 0; r < order.size() && paths.size() < 3; ++r)
        paths.push_back(std::move(polished[order[r]]));
    } else {
      for (Path& p : paths) {
        std::vector<double> history;
        auto result =
            detail::minimize<6>(p.params, loss_at, objective_at, opt, &history);
        if (std::isfinite(result.loss)) {
          p.params = result.params;
          p.loss = result.loss;
          p.iters += result.iterations;
        } else {
          p.loss = std::numeric_limits<double>::infinity();
        }
        p.trace.push_back(
            {lv.target.width(), lv.target.height(), std::move(history)});
      }
    }
  }

  size_t winner = 0;
  for (size_t i = 1; i < paths.size(); ++i)
    if (paths[i].loss < paths[winner].loss) winner = i;
  if (trace) trace->levels = std::move(paths[winner].trace);

  Align3DResult out;
  out.pose = pose_from_params(paths[winner].params);
  out.final_loss =
      evaluate_level(pyramid[0], paths[winner].params, config.charbonnier_eps,
                     false).loss;
  out.iterations = paths[winner].iters;
  PixelFlow flow = reproject_grid(depth, out.pose, k);
  auto warped = warp_image(reference, flow);
  out.coarse = std::move(warped.first);
  out.valid = std::move(warped.second);
  return out;
}

}  // namespace refill3d
