#include "refill3d/sampler.hpp"

#include <algorithm>
#include <stdexcept>

#include "refill3d/parallel.hpp"

namespace refill3d {

namespace {

struct Cell {
  int x0, y0, x1, y1;
  double fu, fv;
};

// Anchors (u, v) inside its grid cell. u == W-1 lands in the last interior
// cell with fractional part exactly 1, so edge samples stay exact.
inline Cell locate(const ImageF& img, double u, double v) {
  int x0 = static_cast<int>(u);
  int y0 = static_cast<int>(v);
  x0 = std::min(x0, std::max(img.width() - 2, 0));
  y0 = std::min(y0, std::max(img.height() - 2, 0));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  return {x0, y0, x1, y1, u - x0, v - y0};
}

inline bool inside(const ImageF& img, double u, double v) {
  return u >= 0.0 && v >= 0.0 && u <= img.width() - 1.0 &&
         v <= img.height() - 1.0;
}

}  // namespace

std::optional<std::array<double, 3>> bilinear_sample(const ImageF& img,
                                                     double u, double v) {
  if (!inside(img, u, v)) return std::nullopt;
  const Cell cl = locate(img, u, v);
  const double w00 = (1.0 - cl.fu) * (1.0 - cl.fv);
  const double w10 = cl.fu * (1.0 - cl.fv);
  const double w01 = (1.0 - cl.fu) * cl.fv;
  const double w11 = cl.fu * cl.fv;
  std::array<double, 3> out{};
  for (int c = 0; c < img.channels(); ++c) {
    out[c] = w00 * img.at(cl.x0, cl.y0, c) + w10 * img.at(cl.x1, cl.y0, c) +
             w01 * img.at(cl.x0, cl.y1, c) + w11 * img.at(cl.x1, cl.y1, c);
  }
  return out;
}

std::optional<SampleGrad> bilinear_sample_grad(const ImageF& img, double u,
                                               double v) {
  if (!inside(img, u, v)) return std::nullopt;
  const Cell cl = locate(img, u, v);
  const double w00 = (1.0 - cl.fu) * (1.0 - cl.fv);
  const double w10 = cl.fu * (1.0 - cl.fv);
  const double w01 = (1.0 - cl.fu) * cl.fv;
  const double w11 = cl.fu * cl.fv;
  SampleGrad g;
  for (int c = 0; c < img.channels(); ++c) {
    const double p00 = img.at(cl.x0, cl.y0, c);
    const double p10 = img.at(cl.x1, cl.y0, c);
    const double p01 = img.at(cl.x0, cl.y1, c);
    const double p11 = img.at(cl.x1, cl.y1, c);
    g.value[c] = w00 * p00 + w10 * p10 + w01 * p01 + w11 * p11;
    g.du[c] = (1.0 - cl.fv) * (p10 - p00) + cl.fv * (p11 - p01);
    g.dv[c] = (1.0 - cl.fu) * (p01 - p00) + cl.fu * (p11 - p10);
  }
  return g;
}

std::pair<ImageF, MaskImage> warp_image(const ImageF& reference,
                                        const PixelFlow& flow) {
  if (reference.width() != flow.width || reference.height() != flow.height)
    throw std::invalid_argument("warp_image: reference and flow sizes differ");
  ImageF out(flow.width, flow.height, reference.channels());
  MaskImage mask(flow.width, flow.height, 0);

  par::for_rows(flow.height, [&](int y) {
    for (int x = 0; x < flow.width; ++x) {
      const size_t i = flow.index(x, y);
      if (!flow.valid.data()[i]) continue;
      const auto s = bilinear_sample(reference, flow.u[i], flow.v[i]);
      if (!s) continue;
      for (int c = 0; c < reference.channels(); ++c)
        out.at(x, y, c) = static_cast<float>((*s)[c]);
      mask.data()[i] = 1;
    }
  });
  return {std::move(out), std::move(mask)};
}

MaskImage dilate_mask(const MaskImage& mask, int radius) {
  if (radius < 0) throw std::invalid_argument("dilate_mask: negative radius");
  MaskImage out = mask;
  if (radius == 0) return out;

  std::vector<std::pair<int, int>> disk;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) disk.emplace_back(dx, dy);

  const int w = mask.width(), h = mask.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y) != 0) continue;
      for (const auto& [dx, dy] : disk) {
        const int nx = x + dx, ny = y + dy;
        if (nx >= 0 && nx < w && ny >= 0 && ny < h) out.at(nx, ny) = 0;
      }
    }
  }
  return out;
}

}  // namespace refill3d
