#include "blips/wavelet.hpp"

#include <array>
#include <vector>

#include "blips/errors.hpp"

namespace blips {
namespace {

// db4 scaling filter (orthonormal, sums to sqrt(2)).
constexpr std::array<double, 8> kLow = {
  0.2303778133088965,   0.7148465705529157,  0.6308807679298589,  -0.027983769416859858,
  -0.18703481171909309, 0.030841381835560764, 0.0328830116668852, -0.010597401785069032,
};

constexpr std::array<double, 8> make_high()
{
  std::array<double, 8> g{};
  for (std::size_t k = 0; k < 8; ++k) {
    g[k] = ((k % 2 == 0) ? 1.0 : -1.0) * kLow[7 - k];
  }
  return g;
}

constexpr std::array<double, 8> kHigh = make_high();

// One analysis step on a strided 1D signal of length n (even).
void analyze(cplx *data, std::size_t n, std::size_t stride, std::vector<cplx> &tmp)
{
  tmp.assign(n, cplx{});
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) {
    cplx a{};
    cplx d{};
    for (std::size_t k = 0; k < kLow.size(); ++k) {
      const cplx v = data[((2 * i + k) % n) * stride];
      a += kLow[k] * v;
      d += kHigh[k] * v;
    }
    tmp[i] = a;
    tmp[half + i] = d;
  }
  for (std::size_t i = 0; i < n; ++i) {
    data[i * stride] = tmp[i];
  }
}

void synthesize(cplx *data, std::size_t n, std::size_t stride, std::vector<cplx> &tmp)
{
  tmp.assign(n, cplx{});
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const cplx a = data[i * stride];
    const cplx d = data[(half + i) * stride];
    for (std::size_t k = 0; k < kLow.size(); ++k) {
      tmp[(2 * i + k) % n] += kLow[k] * a + kHigh[k] * d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    data[i * stride] = tmp[i];
  }
}

void check_dims(const ComplexImage &x, std::size_t levels)
{
  const std::size_t block = std::size_t{1} << levels;
  require(x.height() > 0 && x.width() > 0 && x.height() % block == 0 && x.width() % block == 0,
          "Wavelet2D: dimensions must be divisible by 2^levels");
}

} // namespace

ComplexImage Wavelet2D::forward(const ComplexImage &x) const
{
  check_dims(x, levels_);
  ComplexImage out = x;
  std::vector<cplx> tmp;
  const std::size_t w = x.width();
  std::size_t h_cur = x.height();
  std::size_t w_cur = x.width();
  for (std::size_t level = 0; level < levels_; ++level) {
    for (std::size_t r = 0; r < h_cur; ++r) {
      analyze(&out(r, 0), w_cur, 1, tmp);
    }
    for (std::size_t c = 0; c < w_cur; ++c) {
      analyze(&out(0, c), h_cur, w, tmp);
    }
    h_cur /= 2;
    w_cur /= 2;
  }
  return out;
}

ComplexImage Wavelet2D::inverse(const ComplexImage &coeffs) const
{
  check_dims(coeffs, levels_);
  ComplexImage out = coeffs;
  std::vector<cplx> tmp;
  const std::size_t w = coeffs.width();
  for (std::size_t level = levels_; level-- > 0;) {
    const std::size_t h_cur = coeffs.height() >> level;
    const std::size_t w_cur = coeffs.width() >> level;
    for (std::size_t c = 0; c < w_cur; ++c) {
      synthesize(&out(0, c), h_cur, w, tmp);
    }
    for (std::size_t r = 0; r < h_cur; ++r) {
      synthesize(&out(r, 0), w_cur, 1, tmp);
    }
  }
  return out;
}

} // namespace blips
