#include "blips/cs_pdhg.hpp"

#include <cmath>

#include "blips/errors.hpp"
#include "blips/wavelet.hpp"

namespace blips {
namespace {

std::size_t padded_extent(std::size_t n, std::size_t levels)
{
  std::size_t p = std::size_t{1} << levels;
  while (p < n) {
    p *= 2;
  }
  return p;
}

ComplexImage pad(const ComplexImage &x, Shape to)
{
  ComplexImage out(to);
  for (std::size_t r = 0; r < x.height(); ++r) {
    for (std::size_t c = 0; c < x.width(); ++c) {
      out(r, c) = x(r, c);
    }
  }
  return out;
}

ComplexImage crop(const ComplexImage &x, Shape to)
{
  ComplexImage out(to);
  for (std::size_t r = 0; r < to.height; ++r) {
    for (std::size_t c = 0; c < to.width; ++c) {
      out(r, c) = x(r, c);
    }
  }
  return out;
}

void soft_threshold(ComplexImage &coeffs, double t)
{
  for (auto &v : coeffs.data()) {
    const double m = std::abs(v);
    v = m > t ? v * ((m - t) / m) : cplx{};
  }
}

} // namespace

double operator_norm(const MultiCoilSystem &sys, std::size_t iterations)
{
  ComplexImage v(sys.shape());
  for (auto &e : v.data()) {
    e = 1.0;
  }
  v *= 1.0 / norm2(v);
  double eig = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    ComplexImage next = apply_normal(sys, v);
    eig = norm2(next);
    if (eig == 0.0) {
      break;
    }
    v = (1.0 / eig) * std::move(next);
  }
  return std::sqrt(eig);
}

ComplexImage cs_pdhg_recon(const MultiCoilSystem &sys, const KSpace &y, double weight, std::size_t iterations)
{
  CsConfig cfg;
  cfg.weight = weight;
  cfg.iterations = iterations;
  return cs_pdhg_recon(sys, y, cfg);
}

ComplexImage cs_pdhg_recon(const MultiCoilSystem &sys, const KSpace &y, const CsConfig &cfg)
{
  require(cfg.weight >= 0.0 && std::isfinite(cfg.weight), "cs_pdhg_recon: weight must be >= 0");
  require(y.size() == sys.n_coils(), "cs_pdhg_recon: coil count mismatch");
  const Shape shape = sys.shape();
  const Shape padded{padded_extent(shape.height, cfg.wavelet_levels), padded_extent(shape.width, cfg.wavelet_levels)};
  const Wavelet2D wavelet(cfg.wavelet_levels);

  const double norm_a = operator_norm(sys, cfg.power_iterations);
  if (norm_a == 0.0) {
    throw NumericFailure("cs_pdhg_recon: forward operator vanishes");
  }
  const double tau = 1.0 / norm_a;
  const double sigma = 1.0 / norm_a;

  ComplexImage x(padded);
  ComplexImage x_bar(padded);
  KSpace u(sys.n_coils(), ComplexImage(shape));
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    // dual: prox of sigma F*, F(v) = 1/2 ||v - y||^2
    const KSpace ax = apply_forward(sys, crop(x_bar, shape));
    for (std::size_t c = 0; c < u.size(); ++c) {
      for (std::size_t i = 0; i < u[c].size(); ++i) {
        u[c][i] = (u[c][i] + sigma * (ax[c][i] - y[c][i])) / (1.0 + sigma);
      }
    }
    // primal: prox of tau * weight * ||W .||_1
    ComplexImage v = x;
    v.axpy(-tau, pad(apply_adjoint(sys, u), padded));
    ComplexImage x_new = v;
    if (cfg.weight > 0.0) {
      ComplexImage coeffs = wavelet.forward(v);
      soft_threshold(coeffs, tau * cfg.weight);
      x_new = wavelet.inverse(coeffs);
    }
    x_bar = 2.0 * x_new;
    x_bar -= x;
    x = std::move(x_new);
    if (!all_finite(x)) {
      throw NumericFailure("cs_pdhg_recon: iterate became non-finite");
    }
  }
  return crop(x, shape);
}

} // namespace blips
