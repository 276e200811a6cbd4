#include "blips/cg.hpp"

#include <cmath>

#include "blips/errors.hpp"

namespace blips {

CgResult cg_solve(const LinearOperator &apply_m, const ComplexImage &rhs, double tol, std::size_t max_iter)
{
  return cg_solve(apply_m, rhs, ComplexImage(rhs.shape()), tol, max_iter);
}

CgResult cg_solve(const LinearOperator &apply_m, const ComplexImage &rhs, const ComplexImage &x0, double tol,
                  std::size_t max_iter)
{
  require_same_shape(rhs, x0, "cg_solve");
  require(tol >= 0.0, "cg_solve: tolerance must be nonnegative");
  if (!all_finite(rhs) || !all_finite(x0)) {
    throw NumericFailure("cg_solve: non-finite input");
  }
  CgResult result;
  const double rhs_norm = norm2(rhs);
  if (rhs_norm == 0.0) {
    result.x = ComplexImage(rhs.shape());
    result.report.residual_history.push_back(0.0);
    return result;
  }

  ComplexImage x = x0;
  ComplexImage r = rhs;
  if (norm2_squared(x0) > 0.0) {
    r -= apply_m(x0);
  }
  double rr = norm2_squared(r);
  if (!std::isfinite(rhs_norm) || !std::isfinite(rr)) {
    throw NumericFailure("cg_solve: residual norm overflows");
  }
  auto &rep = result.report;
  rep.relative_residual = std::sqrt(rr) / rhs_norm;
  rep.residual_history.push_back(rep.relative_residual);

  ComplexImage p = r;
  while (rep.relative_residual > tol && rep.iterations < max_iter) {
    const ComplexImage q = apply_m(p);
    const double pq = inner(p, q).real();
    if (!std::isfinite(pq)) {
      throw NumericFailure("cg_solve: non-finite operator output");
    }
    if (pq <= 0.0) {
      throw NumericFailure("cg_solve: operator is not positive definite");
    }
    const double alpha = rr / pq;
    x.axpy(alpha, p);
    r.axpy(-alpha, q);
    const double rr_new = norm2_squared(r);
    ++rep.iterations;
    rep.relative_residual = std::sqrt(rr_new) / rhs_norm;
    rep.residual_history.push_back(rep.relative_residual);
    if (!std::isfinite(rr_new)) {
      throw NumericFailure("cg_solve: residual became non-finite");
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = r[i] + beta * p[i];
    }
  }
  result.x = std::move(x);
  return result;
}

} // namespace blips
