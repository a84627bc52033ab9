#include "refill3d/align2d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "refill3d/detail/optim.hpp"
#include "refill3d/parallel.hpp"
#include "refill3d/sampler.hpp"

namespace refill3d {

namespace {

constexpr double kMinScale = 1e-6;

struct RingProblem {
  const ImageF& target;
  const MaskImage& ring;  // 1 where the pixel contributes to the loss
  const ImageF& coarse;
  const MaskImage& coarse_valid;
};

MaskImage build_ring(const MaskImage& known_mask,
                     const MaskImage& dilated_known) {
  if (known_mask.width() != dilated_known.width() ||
      known_mask.height() != dilated_known.height())
    throw std::invalid_argument("ring_loss_2d: mask size mismatch");
  MaskImage ring(known_mask.width(), known_mask.height(), 0);
  for (int y = 0; y < ring.height(); ++y)
    for (int x = 0; x < ring.width(); ++x)
      ring.at(x, y) = (known_mask.at(x, y) && !dilated_known.at(x, y)) ? 1 : 0;
  return ring;
}

// Sample position in the input image for output pixel (u, v):
// W(p) = (1/s) R(theta)^T (p - t).
inline void inverse_point(const ScaledEuclidean2D& t, double u, double v,
                          double& iu, double& iv) {
  const double c = std::cos(t.theta), s = std::sin(t.theta);
  const double du = u - t.tx, dv = v - t.ty;
  iu = (c * du + s * dv) / t.s;
  iv = (-s * du + c * dv) / t.s;
}

// True when every input pixel the bilinear read touches with nonzero weight
// is marked valid.
bool corners_valid(const MaskImage& valid, double iu, double iv) {
  const int w = valid.width(), h = valid.height();
  int x0 = static_cast<int>(iu);
  int y0 = static_cast<int>(iv);
  x0 = std::min(x0, std::max(w - 2, 0));
  y0 = std::min(y0, std::max(h - 2, 0));
  const double fu = iu - x0, fv = iv - y0;
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  if ((1.0 - fu) * (1.0 - fv) > 0.0 && !valid.at(x0, y0)) return false;
  if (fu * (1.0 - fv) > 0.0 && !valid.at(x1, y0)) return false;
  if ((1.0 - fu) * fv > 0.0 && !valid.at(x0, y1)) return false;
  if (fu * fv > 0.0 && !valid.at(x1, y1)) return false;
  return true;
}

struct RowAccum {
  double loss = 0.0;
  long count = 0;
  std::array<double, 4> grad{};
  std::array<double, 10> hess{};
};

detail::Objective<4> evaluate_ring(const RingProblem& pb,
                                   const std::array<double, 4>& params,
                                   double eps, bool with_derivs) {
  const ScaledEuclidean2D t{params[0], params[1], params[2], params[3]};
  const int w = pb.target.width(), h = pb.target.height();
  const int ch = pb.target.channels();
  const double c = std::cos(t.theta), s = std::sin(t.theta);
  const double inv_s = 1.0 / t.s;
  const double umax = w - 1.0, vmax = h - 1.0;

  detail::Objective<4> obj;
  if (!(t.s > kMinScale)) return obj;  // degenerate scale, +infinity

  std::vector<RowAccum> rows(h);
  par::for_rows(h, [&](int y) {
    RowAccum& acc = rows[y];
    for (int x = 0; x < w; ++x) {
      if (!pb.ring.at(x, y)) continue;
      const double du = x - t.tx, dv = y - t.ty;
      const double iu = (c * du + s * dv) * inv_s;
      const double iv = (-s * du + c * dv) * inv_s;
      if (!(iu >= 0.0 && iu <= umax && iv >= 0.0 && iv <= vmax)) continue;
      if (!corners_valid(pb.coarse_valid, iu, iv)) continue;

      if (!with_derivs) {
        const auto sample = bilinear_sample(pb.coarse, iu, iv);
        for (int cc = 0; cc < ch; ++cc) {
          const double d = (*sample)[cc] - pb.target.at(x, y, cc);
          acc.loss += detail::charbonnier(d, eps);
        }
        ++acc.count;
        continue;
      }

      const auto sample = bilinear_sample_grad(pb.coarse, iu, iv);

      // Derivatives of the inverse-mapped coordinates (iu, iv) with respect
      // to (theta, tx, ty, s).
      const double diu[4] = {(-s * du + c * dv) * inv_s, -c * inv_s,
                             -s * inv_s, -iu * inv_s};
      const double div[4] = {(-c * du - s * dv) * inv_s, s * inv_s,
                             -c * inv_s, -iv * inv_s};

      for (int cc = 0; cc < ch; ++cc) {
        const double d = sample->value[cc] - pb.target.at(x, y, cc);
        acc.loss += detail::charbonnier(d, eps);

        double jrow[4];
        for (int j = 0; j < 4; ++j)
          jrow[j] = sample->du[cc] * diu[j] + sample->dv[cc] * div[j];

        const double gscale = detail::charbonnier_deriv(d, eps);
        const double wgn = detail::charbonnier_weight(d, eps);
        for (int j = 0; j < 4; ++j) acc.grad[j] += gscale * jrow[j];
        int slot = 0;
        for (int j = 0; j < 4; ++j)
          for (int l = j; l < 4; ++l, ++slot)
            acc.hess[slot] += wgn * jrow[j] * jrow[l];
      }
      ++acc.count;
    }
  });

  double loss = 0.0;
  long count = 0;
  std::array<double, 4> grad{};
  std::array<double, 10> hess{};
  for (const RowAccum& acc : rows) {
    loss += acc.loss;
    count += acc.count;
    for (int j = 0; j < 4; ++j) grad[j] += acc.grad[j];
    for (int slot = 0; slot < 10; ++slot) hess[slot] += acc.hess[slot];
  }
  if (count == 0) return obj;

  const double norm = 1.0 / (static_cast<double>(count) * ch);
  obj.loss = loss * norm;
  if (with_derivs) {
    for (int j = 0; j < 4; ++j) obj.grad[j] = grad[j] * norm;
    int slot = 0;
    for (int j = 0; j < 4; ++j)
      for (int l = j; l < 4; ++l, ++slot) {
        obj.hessian[j * 4 + l] = hess[slot] * norm;
        obj.hessian[l * 4 + j] = hess[slot] * norm;
      }
  }
  return obj;
}

std::array<double, 4> params_from_se2(const ScaledEuclidean2D& t) {
  return {t.theta, t.tx, t.ty, t.s};
}

}  // namespace

ScaledEuclidean2D ScaledEuclidean2D::inverse() const {
  // (R(theta) s)^-1 = R(-theta) / s; the inverse offset is -W(0).
  ScaledEuclidean2D inv;
  inv.theta = -theta;
  inv.s = 1.0 / s;
  const double c = std::cos(theta), sn = std::sin(theta);
  inv.tx = -(c * tx + sn * ty) / s;
  inv.ty = -(-sn * tx + c * ty) / s;
  return inv;
}

std::array<double, 2> apply_se2(const ScaledEuclidean2D& t, double u,
                                double v) {
  const double c = std::cos(t.theta), s = std::sin(t.theta);
  return {t.s * c * u - t.s * s * v + t.tx, t.s * s * u + t.s * c * v + t.ty};
}

int default_dilation_radius(int width, int height) {
  return static_cast<int>(
      std::lround(15.0 * std::min(width, height) / 512.0));
}

std::pair<ImageF, MaskImage> resample_se2(const ImageF& img,
                                          const MaskImage& valid,
                                          const ScaledEuclidean2D& t) {
  if (valid.width() != img.width() || valid.height() != img.height())
    throw std::invalid_argument("resample_se2: image/mask size mismatch");
  const int w = img.width(), h = img.height();
  ImageF out(w, h, img.channels());
  MaskImage out_valid(w, h, 0);
  const double umax = w - 1.0, vmax = h - 1.0;

  par::for_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double iu, iv;
      inverse_point(t, x, y, iu, iv);
      if (!(iu >= 0.0 && iu <= umax && iv >= 0.0 && iv <= vmax)) continue;
      if (!corners_valid(valid, iu, iv)) continue;
      const auto s = bilinear_sample(img, iu, iv);
      for (int c = 0; c < img.channels(); ++c)
        out.at(x, y, c) = static_cast<float>((*s)[c]);
      out_valid.at(x, y) = 1;
    }
  });
  return {std::move(out), std::move(out_valid)};
}

double ring_loss_2d(const ScaledEuclidean2D& t, const ImageF& target,
                    const MaskImage& known_mask, const MaskImage& dilated_known,
                    const ImageF& coarse, const MaskImage& coarse_valid,
                    double charbonnier_eps) {
  const MaskImage ring = build_ring(known_mask, dilated_known);
  RingProblem pb{target, ring, coarse, coarse_valid};
  return evaluate_ring(pb, params_from_se2(t), charbonnier_eps, false).loss;
}

std::array<double, 4> ring_loss_grad_2d(const ScaledEuclidean2D& t,
                                        const ImageF& target,
                                        const MaskImage& known_mask,
                                        const MaskImage& dilated_known,
                                        const ImageF& coarse,
                                        const MaskImage& coarse_valid,
                                        double charbonnier_eps) {
  const MaskImage ring = build_ring(known_mask, dilated_known);
  RingProblem pb{target, ring, coarse, coarse_valid};
  return evaluate_ring(pb, params_from_se2(t), charbonnier_eps, true).grad;
}

Align2DResult align_2d(const ImageF& target, const MaskImage& known_mask,
                       const ImageF& coarse, const MaskImage& coarse_valid,
                       const Align2DConfig& config,
                       std::vector<double>* loss_history) {
  if (!target.same_size(coarse))
    throw std::invalid_argument("align_2d: target/coarse size mismatch");
  if (known_mask.width() != target.width() ||
      known_mask.height() != target.height())
    throw std::invalid_argument("align_2d: mask size mismatch");

  const int radius = config.dilation_radius >= 0
                         ? config.dilation_radius
                         : default_dilation_radius(target.width(),
                                                   target.height());
  const MaskImage dilated = dilate_mask(known_mask, radius);
  const MaskImage ring = build_ring(known_mask, dilated);
  RingProblem pb{target, ring, coarse, coarse_valid};

  Align2DResult out;
  const auto identity = params_from_se2(ScaledEuclidean2D::identity());
  const double initial =
      evaluate_ring(pb, identity, config.charbonnier_eps, false).loss;
  if (!std::isfinite(initial)) {
    out.transform = ScaledEuclidean2D::identity();
    out.fine = coarse;
    out.valid = coarse_valid;
    out.final_loss = initial;
    out.refinement_skipped = true;
    if (loss_history) loss_history->push_back(initial);
    return out;
  }

  detail::MinimizeOptions opt;
  opt.max_iters = config.max_iters;
  opt.step_tolerance = config.step_tolerance;
  auto result = detail::minimize<4>(
      identity,
      [&](const std::array<double, 4>& p) {
        return evaluate_ring(pb, p, config.charbonnier_eps, false).loss;
      },
      [&](const std::array<double, 4>& p) {
        return evaluate_ring(pb, p, config.charbonnier_eps, true);
      },
      opt, loss_history);

  out.transform = ScaledEuclidean2D{result.params[0], result.params[1],
                                    result.params[2], result.params[3]};
  out.final_loss = result.loss;
  out.iterations = result.iterations;
  if (result.iterations == 0) {
    // Nothing beat the identity; pass the coarse result through untouched.
    out.transform = ScaledEuclidean2D::identity();
    out.fine = coarse;
    out.valid = coarse_valid;
    out.final_loss = initial;
    return out;
  }
  auto resampled = resample_se2(coarse, coarse_valid, out.transform);
  out.fine = std::move(resampled.first);
  out.valid = std::move(resampled.second);
  return out;
}

}  // namespace refill3d
