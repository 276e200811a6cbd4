#include "blips/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "blips/errors.hpp"

namespace blips {
namespace {

double reference_peak(const ComplexImage &xtrue)
{
  const double peak = max_abs(xtrue);
  require(peak > 0.0, "metrics: reference image is identically zero");
  return peak;
}

double psnr_from_mse(double peak, double mse)
{
  if (mse <= 0.0) {
    return kPsnrCap;
  }
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

// Periodic 2D correlation of a real image with a square kernel centred on its middle tap.
std::vector<double> periodic_filter(const std::vector<double> &img, std::size_t h, std::size_t w,
                                    const std::vector<double> &kernel, std::size_t side)
{
  std::vector<double> out(h * w);
  const std::size_t half = side / 2;
  const auto rows = static_cast<std::ptrdiff_t>(h);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t rr = 0; rr < rows; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::size_t ky = 0; ky < side; ++ky) {
        const std::size_t sr = (r + ky + h * side - half) % h;
        for (std::size_t kx = 0; kx < side; ++kx) {
          const std::size_t sc = (c + kx + w * side - half) % w;
          acc += kernel[ky * side + kx] * img[sr * w + sc];
        }
      }
      out[r * w + c] = acc;
    }
  }
  return out;
}

} // namespace

double psnr(const ComplexImage &xhat, const ComplexImage &xtrue)
{
  require_same_shape(xhat, xtrue, "psnr");
  const double peak = reference_peak(xtrue);
  double sse = 0.0;
  for (std::size_t i = 0; i < xhat.size(); ++i) {
    const double d = std::abs(xhat[i]) - std::abs(xtrue[i]);
    sse += d * d;
  }
  return psnr_from_mse(peak, sse / static_cast<double>(xhat.size()));
}

double local_psnr(const ComplexImage &xhat, const ComplexImage &xtrue, std::size_t row, std::size_t col,
                  std::size_t window)
{
  require_same_shape(xhat, xtrue, "local_psnr");
  require(row < xtrue.height() && col < xtrue.width(), "local_psnr: centre outside image");
  const double peak = reference_peak(xtrue);
  const std::size_t half = window / 2;
  const std::size_t r0 = row >= half ? row - half : 0;
  const std::size_t c0 = col >= half ? col - half : 0;
  const std::size_t r1 = std::min(xtrue.height(), row + half + 1);
  const std::size_t c1 = std::min(xtrue.width(), col + half + 1);
  double sse = 0.0;
  for (std::size_t r = r0; r < r1; ++r) {
    for (std::size_t c = c0; c < c1; ++c) {
      const double d = std::abs(xhat(r, c)) - std::abs(xtrue(r, c));
      sse += d * d;
    }
  }
  return psnr_from_mse(peak, sse / static_cast<double>((r1 - r0) * (c1 - c0)));
}

std::vector<double> gaussian_window(std::size_t side, double sigma)
{
  std::vector<double> g(side * side);
  const double centre = (static_cast<double>(side) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double dr = static_cast<double>(r) - centre;
      const double dc = static_cast<double>(c) - centre;
      g[r * side + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      total += g[r * side + c];
    }
  }
  for (auto &v : g) {
    v /= total;
  }
  return g;
}

double ssim(const ComplexImage &xhat, const ComplexImage &xtrue, const SsimConfig &cfg)
{
  require_same_shape(xhat, xtrue, "ssim");
  const std::size_t h = xtrue.height();
  const std::size_t w = xtrue.width();
  const std::size_t side = cfg.window;
  require(h >= side && w >= side, "ssim: image smaller than the SSIM window");
  const double range = reference_peak(xtrue);
  const double c1 = (cfg.k1 * range) * (cfg.k1 * range);
  const double c2 = (cfg.k2 * range) * (cfg.k2 * range);

  // The 2D window is a product of 1D Gaussians, so filter rows then columns.
  std::vector<double> g1(side);
  {
    const double centre = (static_cast<double>(side) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t k = 0; k < side; ++k) {
      const double d = static_cast<double>(k) - centre;
      g1[k] = std::exp(-(d * d) / (2.0 * cfg.sigma * cfg.sigma));
      total += g1[k];
    }
    for (auto &v : g1) {
      v /= total;
    }
  }
  const std::vector<double> a = magnitude(xhat);
  const std::vector<double> b = magnitude(xtrue);
  const std::size_t oh = h - side + 1;
  const std::size_t ow = w - side + 1;

  // Five statistics: a, b, a^2, b^2, ab.
  auto stat = [&](std::size_t k, std::size_t i) {
    switch (k) {
    case 0:
      return a[i];
    case 1:
      return b[i];
    case 2:
      return a[i] * a[i];
    case 3:
      return b[i] * b[i];
    default:
      return a[i] * b[i];
    }
  };
  std::vector<std::vector<double>> rowpass(5, std::vector<double>(h * ow));
  const auto rows = static_cast<std::ptrdiff_t>(h);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t rr = 0; rr < rows; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    for (std::size_t k = 0; k < 5; ++k) {
      for (std::size_t c = 0; c < ow; ++c) {
        double acc = 0.0;
        for (std::size_t t = 0; t < side; ++t) {
          acc += g1[t] * stat(k, r * w + c + t);
        }
        rowpass[k][r * ow + c] = acc;
      }
    }
  }
  std::vector<double> local(oh * ow);
  const auto out_rows = static_cast<std::ptrdiff_t>(oh);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t rr = 0; rr < out_rows; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    for (std::size_t c = 0; c < ow; ++c) {
      double m[5] = {};
      for (std::size_t k = 0; k < 5; ++k) {
        for (std::size_t t = 0; t < side; ++t) {
          m[k] += g1[t] * rowpass[k][(r + t) * ow + c];
        }
      }
      const double mu_a = m[0];
      const double mu_b = m[1];
      const double var_a = m[2] - mu_a * mu_a;
      const double var_b = m[3] - mu_b * mu_b;
      const double cov = m[4] - mu_a * mu_b;
      local[r * ow + c] = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                          ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
    }
  }
  double total = 0.0;
  for (double v : local) {
    total += v;
  }
  return total / static_cast<double>(local.size());
}

std::vector<double> log_kernel(std::size_t side, double sigma)
{
  const double centre = (static_cast<double>(side) - 1.0) / 2.0;
  std::vector<double> gauss(side * side);
  double gsum = 0.0;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double dr = static_cast<double>(r) - centre;
      const double dc = static_cast<double>(c) - centre;
      gauss[r * side + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      gsum += gauss[r * side + c];
    }
  }
  std::vector<double> kernel(side * side);
  double ksum = 0.0;
  const double s2 = sigma * sigma;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double dr = static_cast<double>(r) - centre;
      const double dc = static_cast<double>(c) - centre;
      kernel[r * side + c] = gauss[r * side + c] / gsum * (dr * dr + dc * dc - 2.0 * s2) / (s2 * s2);
      ksum += kernel[r * side + c];
    }
  }
  const double mean = ksum / static_cast<double>(side * side);
  for (auto &v : kernel) {
    v -= mean;
  }
  return kernel;
}

double hfen(const ComplexImage &xhat, const ComplexImage &xtrue)
{
  require_same_shape(xhat, xtrue, "hfen");
  const std::vector<double> a = magnitude(xhat);
  const std::vector<double> b = magnitude(xtrue);
  const std::vector<double> kernel = log_kernel();
  const auto fa = periodic_filter(a, xtrue.height(), xtrue.width(), kernel, 15);
  const auto fb = periodic_filter(b, xtrue.height(), xtrue.width(), kernel, 15);
  double acc = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    acc += (fa[i] - fb[i]) * (fa[i] - fb[i]);
  }
  return std::sqrt(acc);
}

double hfen_normalized(const ComplexImage &xhat, const ComplexImage &xtrue)
{
  const std::vector<double> b = magnitude(xtrue);
  const auto fb = periodic_filter(b, xtrue.height(), xtrue.width(), log_kernel(), 15);
  double acc = 0.0;
  for (double v : fb) {
    acc += v * v;
  }
  require(acc > 0.0, "hfen_normalized: reference has no edges");
  return hfen(xhat, xtrue) / std::sqrt(acc);
}

MetricReport evaluate(const ComplexImage &xhat, const ComplexImage &xtrue)
{
  return {psnr(xhat, xtrue), ssim(xhat, xtrue), hfen(xhat, xtrue), hfen_normalized(xhat, xtrue)};
}

} // namespace blips
