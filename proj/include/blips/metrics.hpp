#pragma once

#include <vector>

#include "blips/complex_image.hpp"

namespace blips {

inline constexpr double kPsnrCap = 300.0;

struct MetricReport
{
  double psnr_db = 0.0;
  double ssim = 0.0;
  double hfen = 0.0;
  double hfen_normalized = 0.0;
};

// All metrics compare magnitude images.

// 10 log10(max|xtrue|^2 / MSE), capped at kPsnrCap.
double psnr(const ComplexImage &xhat, const ComplexImage &xtrue);
// PSNR over the window of side `window` centred at (row, col), clipped to the
// image; the peak is still max|xtrue| over the full image.
double local_psnr(const ComplexImage &xhat, const ComplexImage &xtrue, std::size_t row, std::size_t col,
                  std::size_t window = 11);

struct SsimConfig
{
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// Mean SSIM over all fully contained windows, dynamic range max|xtrue|.
double ssim(const ComplexImage &xhat, const ComplexImage &xtrue, const SsimConfig &cfg = {});
// Normalized 2D Gaussian weights, side x side, row-major.
std::vector<double> gaussian_window(std::size_t side, double sigma);

// 15x15 Laplacian of Gaussian with sigma 1.5, shifted to sum to zero; row-major.
std::vector<double> log_kernel(std::size_t side = 15, double sigma = 1.5);
// ||LoG(|xhat|) - LoG(|xtrue|)||_2 with periodic convolution.
double hfen(const ComplexImage &xhat, const ComplexImage &xtrue);
// hfen divided by ||LoG(|xtrue|)||_2.
double hfen_normalized(const ComplexImage &xhat, const ComplexImage &xtrue);

MetricReport evaluate(const ComplexImage &xhat, const ComplexImage &xtrue);

} // namespace blips
