#pragma once

// Direct loop versions of the image metrics, written without the library's
// helpers (no separable filtering, no shared kernels).

#include <cmath>
#include <vector>

#include "blips/complex_image.hpp"

namespace testing {

inline double naive_psnr(const blips::ComplexImage &xh, const blips::ComplexImage &xt)
{
  double peak = 0.0;
  double sse = 0.0;
  for (std::size_t i = 0; i < xt.size(); ++i) {
    peak = std::max(peak, std::abs(xt[i]));
    sse += std::pow(std::abs(xh[i]) - std::abs(xt[i]), 2);
  }
  return 10.0 * std::log10(peak * peak * static_cast<double>(xt.size()) / sse);
}

// One window at a time: weighted means, then centred second moments.
inline double naive_ssim(const blips::ComplexImage &xh, const blips::ComplexImage &xt)
{
  const int side = 11;
  const double sigma = 1.5;
  std::vector<double> g(side * side);
  double gs = 0.0;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      g[r * side + c] = std::exp(-((r - 5) * (r - 5) + (c - 5) * (c - 5)) / (2.0 * sigma * sigma));
      gs += g[r * side + c];
    }
  }
  double peak = 0.0;
  for (std::size_t i = 0; i < xt.size(); ++i) {
    peak = std::max(peak, std::abs(xt[i]));
  }
  const double c1 = std::pow(0.01 * peak, 2);
  const double c2 = std::pow(0.03 * peak, 2);
  const int h = static_cast<int>(xt.height());
  const int w = static_cast<int>(xt.width());
  double total = 0.0;
  int windows = 0;
  for (int r0 = 0; r0 + side <= h; ++r0) {
    for (int c0 = 0; c0 + side <= w; ++c0) {
      double ma = 0.0;
      double mb = 0.0;
      for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
          const double wt = g[r * side + c] / gs;
          ma += wt * std::abs(xh(r0 + r, c0 + c));
          mb += wt * std::abs(xt(r0 + r, c0 + c));
        }
      }
      double va = 0.0;
      double vb = 0.0;
      double cov = 0.0;
      for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
          const double wt = g[r * side + c] / gs;
          const double da = std::abs(xh(r0 + r, c0 + c)) - ma;
          const double db = std::abs(xt(r0 + r, c0 + c)) - mb;
          va += wt * da * da;
          vb += wt * db * db;
          cov += wt * da * db;
        }
      }
      total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++windows;
    }
  }
  return total / windows;
}

// Laplacian of a normalized 15x15 Gaussian (sigma 1.5), made zero-sum, applied by
// direct periodic convolution.
inline double naive_hfen(const blips::ComplexImage &xh, const blips::ComplexImage &xt)
{
  const int side = 15;
  const double s2 = 1.5 * 1.5;
  double k[side][side];
  double gs = 0.0;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      gs += std::exp(-((r - 7) * (r - 7) + (c - 7) * (c - 7)) / (2 * s2));
    }
  }
  double ks = 0.0;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const double rr = (r - 7) * (r - 7) + (c - 7) * (c - 7);
      k[r][c] = std::exp(-rr / (2 * s2)) / gs * (rr - 2 * s2) / (s2 * s2);
      ks += k[r][c];
    }
  }
  const int h = static_cast<int>(xt.height());
  const int w = static_cast<int>(xt.width());
  double acc = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double fa = 0.0;
      double fb = 0.0;
      for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
          const int sy = ((y + 7 - r) % h + h) % h;
          const int sx = ((x + 7 - c) % w + w) % w;
          const double kv = k[r][c] - ks / (side * side);
          fa += kv * std::abs(xh(sy, sx));
          fb += kv * std::abs(xt(sy, sx));
        }
      }
      acc += (fa - fb) * (fa - fb);
    }
  }
  return std::sqrt(acc);
}

} // namespace testing
