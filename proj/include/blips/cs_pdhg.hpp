#pragma once

#include "blips/multicoil.hpp"

namespace blips {

struct CsConfig
{
  double weight = 1e-7;
  std::size_t iterations = 30;
  std::size_t wavelet_levels = 3;
  std::size_t power_iterations = 20;
};

// Estimate of ||A|| by power iteration on A^H A from a constant start.
double operator_norm(const MultiCoilSystem &sys, std::size_t iterations);

// min_x 1/2 sum_c ||A_c x - y_c||^2 + weight ||W x||_1 by primal-dual hybrid
// gradient with tau = sigma = 1/||A||. Non-power-of-two grids are zero padded
// for the wavelet and cropped on return.
ComplexImage cs_pdhg_recon(const MultiCoilSystem &sys, const KSpace &y, double weight, std::size_t iterations);
ComplexImage cs_pdhg_recon(const MultiCoilSystem &sys, const KSpace &y, const CsConfig &cfg);

} // namespace blips
