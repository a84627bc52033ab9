#include "refill3d/compose.hpp"

#include <algorithm>
#include <stdexcept>

namespace refill3d {

namespace {

void require_match(const ImageF& a, const ImageF& b, const MaskImage& m,
                   const char* who) {
  if (!a.same_size(b) || m.width() != a.width() || m.height() != a.height())
    throw std::invalid_argument(std::string(who) + ": size mismatch");
}

}  // namespace

ImageF fill(const ImageF& target, const MaskImage& hole_mask,
            const ImageF& fine) {
  require_match(target, fine, hole_mask, "fill");
  ImageF out = target;
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      if (!hole_mask.at(x, y))
        for (int c = 0; c < out.channels(); ++c)
          out.at(x, y, c) = fine.at(x, y, c);
  return out;
}

HarmonizeResult harmonize(const ImageF& fine, const ImageF& target,
                          const MaskImage& hole_mask,
                          const MaskImage& dilated_mask,
                          const MaskImage& fine_valid) {
  require_match(fine, target, hole_mask, "harmonize");
  HarmonizeResult out;
  out.image = fine;

  const int ch = fine.channels();
  double n = 0.0;
  std::array<double, 3> sf{}, st{}, sff{}, sft{};
  for (int y = 0; y < fine.height(); ++y) {
    for (int x = 0; x < fine.width(); ++x) {
      if (!hole_mask.at(x, y) || dilated_mask.at(x, y) ||
          !fine_valid.at(x, y))
        continue;
      n += 1.0;
      for (int c = 0; c < ch; ++c) {
        const double f = fine.at(x, y, c), t = target.at(x, y, c);
        sf[c] += f;
        st[c] += t;
        sff[c] += f * f;
        sft[c] += f * t;
      }
    }
  }

  if (n == 0.0) {
    out.ring_empty = true;
    return out;
  }

  for (int c = 0; c < ch; ++c) {
    const double mean_f = sf[c] / n, mean_t = st[c] / n;
    const double var_f = sff[c] / n - mean_f * mean_f;
    const double cov = sft[c] / n - mean_f * mean_t;
    double gain = 1.0;
    if (var_f > 1e-12) gain = cov / var_f;
    gain = std::clamp(gain, 0.5, 2.0);
    const double bias = mean_t - gain * mean_f;
    out.gain[c] = gain;
    out.bias[c] = bias;
  }

  for (int y = 0; y < fine.height(); ++y)
    for (int x = 0; x < fine.width(); ++x)
      for (int c = 0; c < ch; ++c) {
        const double v = out.gain[c] * fine.at(x, y, c) + out.bias[c];
        out.image.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
  return out;
}

ImageF compose_final(const ImageF& target, const MaskImage& hole_mask,
                     const ImageF& harmonized_fine) {
  require_match(target, harmonized_fine, hole_mask, "compose_final");
  return fill(target, hole_mask, harmonized_fine);
}

double hole_coverage(const MaskImage& hole_mask, const MaskImage& valid) {
  if (hole_mask.width() != valid.width() ||
      hole_mask.height() != valid.height())
    throw std::invalid_argument("hole_coverage: size mismatch");
  size_t holes = 0, covered = 0;
  for (size_t i = 0; i < hole_mask.data().size(); ++i) {
    if (hole_mask.data()[i]) continue;
    ++holes;
    covered += valid.data()[i];
  }
  if (holes == 0) return 1.0;
  return static_cast<double>(covered) / static_cast<double>(holes);
}

}  // namespace refill3d
