#include "refill3d/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "refill3d/parallel.hpp"

namespace refill3d {

namespace {

constexpr double kPsnrCap = 99.0;

double mse_to_psnr(double mse) {
  if (mse <= 0.0) return kPsnrCap;
  const double db = 10.0 * std::log10(1.0 / mse);
  return db > kPsnrCap ? kPsnrCap : db;
}

void require_same_size(const ImageF& a, const ImageF& b, const char* who) {
  if (!a.same_size(b)) throw std::invalid_argument(std::string(who) + ": size mismatch");
}

}  // namespace

double psnr(const ImageF& a, const ImageF& b) {
  require_same_size(a, b, "psnr");
  double sum = 0.0;
  const size_t n = a.data().size();
  for (size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    sum += d * d;
  }
  return mse_to_psnr(sum / static_cast<double>(n));
}

double psnr(const ImageF& a, const ImageF& b, const MaskImage& region) {
  require_same_size(a, b, "psnr");
  if (region.width() != a.width() || region.height() != a.height())
    throw std::invalid_argument("psnr: region size mismatch");
  double sum = 0.0;
  size_t n = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!region.at(x, y)) continue;
      for (int c = 0; c < a.channels(); ++c) {
        const double d =
            static_cast<double>(a.at(x, y, c)) - b.at(x, y, c);
        sum += d * d;
      }
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("psnr: empty region");
  return mse_to_psnr(sum / static_cast<double>(n * a.channels()));
}

double ssim(const ImageF& a, const ImageF& b) {
  require_same_size(a, b, "ssim");
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
  constexpr double kC2 = 0.03 * 0.03;  // (K2 * L)^2
  if (a.width() < kWin || a.height() < kWin)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");

  // Normalized Gaussian window, precomputed once.
  static const std::vector<double> weights = [] {
    std::vector<double> w(kWin * kWin);
    double sum = 0.0;
    for (int y = 0; y < kWin; ++y)
      for (int x = 0; x < kWin; ++x) {
        const double dx = x - (kWin - 1) / 2.0, dy = y - (kWin - 1) / 2.0;
        w[y * kWin + x] = std::exp(-(dx * dx + dy * dy) / (2 * kSigma * kSigma));
        sum += w[y * kWin + x];
      }
    for (double& v : w) v /= sum;
    return w;
  }();

  const int nx = a.width() - kWin + 1;
  const int ny = a.height() - kWin + 1;
  const int ch = a.channels();
  std::vector<double> row_sums(ny, 0.0);

  par::for_rows(ny, [&](int wy) {
    double acc = 0.0;
    for (int wx = 0; wx < nx; ++wx) {
      for (int c = 0; c < ch; ++c) {
        double mu_a = 0, mu_b = 0, ea2 = 0, eb2 = 0, eab = 0;
        for (int dy = 0; dy < kWin; ++dy) {
          for (int dx = 0; dx < kWin; ++dx) {
            const double w = weights[dy * kWin + dx];
            const double va = a.at(wx + dx, wy + dy, c);
            const double vb = b.at(wx + dx, wy + dy, c);
            mu_a += w * va;
            mu_b += w * vb;
            ea2 += w * va * va;
            eb2 += w * vb * vb;
            eab += w * va * vb;
          }
        }
        const double var_a = ea2 - mu_a * mu_a;
        const double var_b = eb2 - mu_b * mu_b;
        const double cov = eab - mu_a * mu_b;
        const double cross = mu_a * mu_b;
        const double num = (2.0 * cross + kC1) * (2.0 * cov + kC2);
        const double den =
            (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
        acc += num / den;
      }
    }
    row_sums[wy] = acc;
  });

  double total = 0.0;
  for (double v : row_sums) total += v;
  return total / (static_cast<double>(nx) * ny * ch);
}

double valid_ratio(const MaskImage& mask) {
  return static_cast<double>(mask.count_ones()) /
         static_cast<double>(mask.data().size());
}

bool valid_ratio_accepts(double ratio) {
  return ratio >= 0.60 && ratio <= 0.80;
}

MaskAreaClass mask_area_class(const MaskImage& hole_mask) {
  // Count zeros directly: deriving the fraction from its complement shifts
  // exact band boundaries like 0.15 by one rounding step.
  const size_t zeros = hole_mask.data().size() - hole_mask.count_ones();
  const double hole =
      static_cast<double>(zeros) / static_cast<double>(hole_mask.data().size());
  if (hole >= 0.05 && hole <= 0.15) return MaskAreaClass::Small;
  if (hole > 0.15 && hole <= 0.30) return MaskAreaClass::Large;
  return MaskAreaClass::OutOfBand;
}

}  // namespace refill3d
