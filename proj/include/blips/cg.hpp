#pragma once

#include <functional>
#include <vector>

#include "blips/complex_image.hpp"

namespace blips {

using LinearOperator = std::function<ComplexImage(const ComplexImage &)>;

struct CgReport
{
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  // Relative residual before the first and after every iteration.
  std::vector<double> residual_history;
};

struct CgResult
{
  ComplexImage x;
  CgReport report;
};

// Conjugate gradients for a self-adjoint positive definite operator. Stops when
// ||M x - rhs|| / ||rhs|| <= tol or after max_iter iterations.
CgResult cg_solve(const LinearOperator &apply_m, const ComplexImage &rhs, double tol, std::size_t max_iter);
// Warm-started variant; iterates monotonically decrease the quadratic energy from x0.
CgResult cg_solve(const LinearOperator &apply_m, const ComplexImage &rhs, const ComplexImage &x0, double tol,
                  std::size_t max_iter);

} // namespace blips
