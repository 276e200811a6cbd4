#include "blips/conv.hpp"

#include "blips/errors.hpp"

namespace blips::kernels {
namespace {

// Neighbour index tables for periodic padding: shifted[k][x] = (x + k - 1) mod n.
struct Wrap
{
  std::vector<std::size_t> shifted[3];

  explicit Wrap(std::size_t n)
  {
    for (std::size_t k = 0; k < 3; ++k) {
      shifted[k].resize(n);
      for (std::size_t x = 0; x < n; ++x) {
        shifted[k][x] = (x + n + k - 1) % n;
      }
    }
  }
};

// dst[c] += wt * src[(c + off) mod w] for off in {-1, 0, 1}; the interior is a
// contiguous, vectorizable loop and only the two edge columns wrap.
inline void shifted_axpy(double *dst, const double *src, double wt, std::ptrdiff_t off, std::size_t w)
{
  if (w < 3) {
    for (std::size_t c = 0; c < w; ++c) {
      dst[c] += wt * src[(c + w + static_cast<std::size_t>(off + 1) - 1) % w];
    }
    return;
  }
  dst[0] += wt * src[(w + static_cast<std::size_t>(off + 1) - 1) % w];
  const double *s = src + off;
  for (std::size_t c = 1; c + 1 < w; ++c) {
    dst[c] += wt * s[c];
  }
  dst[w - 1] += wt * src[(2 * w - 2 + static_cast<std::size_t>(off + 1)) % w];
}

// sum_c g[c] * src[(c + off) mod w]
inline double shifted_dot(const double *g, const double *src, std::ptrdiff_t off, std::size_t w)
{
  double acc = 0.0;
  if (w < 3) {
    for (std::size_t c = 0; c < w; ++c) {
      acc += g[c] * src[(c + w + static_cast<std::size_t>(off + 1) - 1) % w];
    }
    return acc;
  }
  acc += g[0] * src[(w + static_cast<std::size_t>(off + 1) - 1) % w];
  const double *s = src + off;
  for (std::size_t c = 1; c + 1 < w; ++c) {
    acc += g[c] * s[c];
  }
  acc += g[w - 1] * src[(2 * w - 2 + static_cast<std::size_t>(off + 1)) % w];
  return acc;
}

} // namespace

FeatureMap conv3x3_forward(const ConvLayer &layer, const FeatureMap &input)
{
  require(input.channels == layer.in_channels, "conv3x3_forward: channel mismatch");
  const std::size_t h = input.height;
  const std::size_t w = input.width;
  const Wrap rows(h);
  FeatureMap out(layer.out_channels, h, w);
  const auto jobs = static_cast<std::ptrdiff_t>(layer.out_channels * h);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t job = 0; job < jobs; ++job) {
    const std::size_t o = static_cast<std::size_t>(job) / h;
    const std::size_t r = static_cast<std::size_t>(job) % h;
    double *dst = out.row(o, r);
    for (std::size_t c = 0; c < w; ++c) {
      dst[c] = layer.bias[o];
    }
    for (std::size_t i = 0; i < layer.in_channels; ++i) {
      for (std::size_t ky = 0; ky < 3; ++ky) {
        const double *src = input.row(i, rows.shifted[ky][r]);
        for (std::size_t kx = 0; kx < 3; ++kx) {
          shifted_axpy(dst, src, layer.w(o, i, ky, kx), static_cast<std::ptrdiff_t>(kx) - 1, w);
        }
      }
    }
  }
  return out;
}

FeatureMap conv3x3_backward_input(const ConvLayer &layer, const FeatureMap &grad_out)
{
  require(grad_out.channels == layer.out_channels, "conv3x3_backward_input: channel mismatch");
  const std::size_t h = grad_out.height;
  const std::size_t w = grad_out.width;
  // grad_in(i, r, c) = sum g(o, r - ky + 1, c - kx + 1) w(o, i, ky, kx); index 2 - k gives x - k + 1.
  const Wrap rows(h);
  FeatureMap grad_in(layer.in_channels, h, w);
  const auto jobs = static_cast<std::ptrdiff_t>(layer.in_channels * h);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t job = 0; job < jobs; ++job) {
    const std::size_t i = static_cast<std::size_t>(job) / h;
    const std::size_t r = static_cast<std::size_t>(job) % h;
    double *dst = grad_in.row(i, r);
    for (std::size_t o = 0; o < layer.out_channels; ++o) {
      for (std::size_t ky = 0; ky < 3; ++ky) {
        const double *src = grad_out.row(o, rows.shifted[2 - ky][r]);
        for (std::size_t kx = 0; kx < 3; ++kx) {
          shifted_axpy(dst, src, layer.w(o, i, ky, kx), 1 - static_cast<std::ptrdiff_t>(kx), w);
        }
      }
    }
  }
  return grad_in;
}

void conv3x3_backward_params(const FeatureMap &input, const FeatureMap &grad_out, ConvLayer &grad)
{
  require(input.channels == grad.in_channels && grad_out.channels == grad.out_channels,
          "conv3x3_backward_params: channel mismatch");
  const std::size_t h = input.height;
  const std::size_t w = input.width;
  const Wrap rows(h);
  const auto jobs = static_cast<std::ptrdiff_t>(grad.out_channels * grad.in_channels);
  // One (o, i) pair per task; every sum runs in a fixed order.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t job = 0; job < jobs; ++job) {
    const std::size_t o = static_cast<std::size_t>(job) / grad.in_channels;
    const std::size_t i = static_cast<std::size_t>(job) % grad.in_channels;
    double acc[3][3] = {};
    for (std::size_t r = 0; r < h; ++r) {
      const double *g = grad_out.row(o, r);
      for (std::size_t ky = 0; ky < 3; ++ky) {
        const double *src = input.row(i, rows.shifted[ky][r]);
        for (std::size_t kx = 0; kx < 3; ++kx) {
          acc[ky][kx] += shifted_dot(g, src, static_cast<std::ptrdiff_t>(kx) - 1, w);
        }
      }
    }
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        grad.w(o, i, ky, kx) += acc[ky][kx];
      }
    }
  }
  for (std::size_t o = 0; o < grad.out_channels; ++o) {
    double s = 0.0;
    for (std::size_t p = 0; p < h * w; ++p) {
      s += grad_out.data[o * h * w + p];
    }
    grad.bias[o] += s;
  }
}

} // namespace blips::kernels
