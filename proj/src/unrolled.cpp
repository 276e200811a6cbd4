#include "blips/unrolled.hpp"

#include <cmath>

#include "blips/cg.hpp"
#include "blips/errors.hpp"

namespace blips {

void SupervisedConfig::validate() const
{
  require(nu >= 0.0 && std::isfinite(nu), "SupervisedConfig: nu must be >= 0");
  require(cg_iters >= 1, "SupervisedConfig: cg_iters must be >= 1");
  require(cg_tol >= 0.0, "SupervisedConfig: cg_tol must be >= 0");
}

ComplexImage solve_normal(const MultiCoilSystem &sys, const ComplexImage &rhs, const SupervisedConfig &scfg)
{
  if (scfg.nu == 0.0) {
    return rhs;
  }
  const double nu = scfg.nu;
  const LinearOperator normal = [&](const ComplexImage &v) {
    ComplexImage out = v;
    out.axpy(nu, apply_normal(sys, v));
    return out;
  };
  return cg_solve(normal, rhs, scfg.cg_tol, scfg.cg_iters).x;
}

ComplexImage data_consistency(const MultiCoilSystem &sys, const KSpace &y, const ComplexImage &z,
                              const SupervisedConfig &scfg)
{
  ComplexImage rhs = z;
  if (scfg.nu != 0.0) {
    rhs.axpy(scfg.nu, apply_adjoint(sys, y));
  }
  return solve_normal(sys, rhs, scfg);
}

ComplexImage supervised_iteration(const DenoiserParams &params, const ComplexImage &x, const MultiCoilSystem &sys,
                                  const KSpace &y, const SupervisedConfig &scfg)
{
  ComplexImage z = x + denoiser_forward(params, x);
  return data_consistency(sys, y, z, scfg);
}

ComplexImage anchored_iteration(const DenoiserParams &params, const ComplexImage &x, const ComplexImage &anchor,
                                const MultiCoilSystem &sys, const KSpace &y, const SupervisedConfig &scfg)
{
  ComplexImage z = anchor + denoiser_forward(params, x);
  return data_consistency(sys, y, z, scfg);
}

IterationGradients supervised_iteration_backward(const DenoiserParams &params, const ComplexImage &x,
                                                 const MultiCoilSystem &sys, const SupervisedConfig &scfg,
                                                 const ComplexImage &upstream, Coupling coupling)
{
  // dL/dz = M^{-1} dL/dx_{l+1} since M = nu A^H A + I is self-adjoint.
  const ComplexImage v = solve_normal(sys, upstream, scfg);
  DenoiserGradients dg = denoiser_backward(params, x, v);
  IterationGradients out{std::move(dg.params), std::move(dg.input)};
  if (coupling == Coupling::residual) {
    out.input += v;
  }
  return out;
}

ComplexImage unroll_forward(const DenoiserParams &params, const ComplexImage &x0, const MultiCoilSystem &sys,
                            const KSpace &y, const SupervisedConfig &scfg, Coupling coupling,
                            const ComplexImage *anchor, UnrollTape *tape)
{
  scfg.validate();
  if (coupling == Coupling::anchored) {
    require(anchor != nullptr, "unroll_forward: anchored coupling needs an anchor image");
  }
  ComplexImage x = x0;
  if (tape != nullptr) {
    tape->inputs.clear();
  }
  for (std::size_t l = 0; l < scfg.unrolls; ++l) {
    if (tape != nullptr) {
      tape->inputs.push_back(x);
    }
    x = coupling == Coupling::residual ? supervised_iteration(params, x, sys, y, scfg)
                                       : anchored_iteration(params, x, *anchor, sys, y, scfg);
    if (!all_finite(x)) {
      throw NumericFailure("unrolled iteration produced non-finite values");
    }
  }
  return x;
}

IterationGradients unroll_backward(const DenoiserParams &params, const UnrollTape &tape, const MultiCoilSystem &sys,
                                   const SupervisedConfig &scfg, const ComplexImage &upstream, Coupling coupling)
{
  IterationGradients total{params.zeros_like(), upstream};
  for (std::size_t l = tape.inputs.size(); l-- > 0;) {
    IterationGradients g = supervised_iteration_backward(params, tape.inputs[l], sys, scfg, total.input, coupling);
    add_scaled(total.params, g.params, 1.0);
    total.input = std::move(g.input);
  }
  return total;
}

PipelineSpec PipelineSpec::make(PipelineKind kind)
{
  PipelineSpec spec;
  spec.kind = kind;
  if (kind == PipelineKind::p3) {
    spec.blind.outer_iters = 1;
    spec.blind.nu = 0.5;
    spec.blind.lambda = 0.8;
  }
  spec.supervised2 = spec.supervised;
  return spec;
}

void PipelineSpec::validate() const
{
  blind.validate();
  supervised.validate();
  if (kind == PipelineKind::p3) {
    supervised2.validate();
    require(blind.outer_iters == 1, "PipelineSpec: P3 uses exactly one blind iteration");
  }
}

ComplexImage supervised_recon(const DenoiserParams &params, const MultiCoilSystem &sys, const KSpace &y,
                              const SupervisedConfig &scfg)
{
  return unroll_forward(params, zero_filled_recon(sys, y), sys, y, scfg);
}

ComplexImage run_pipeline_from_blind(const PipelineSpec &spec, const PipelineParams &params,
                                     const MultiCoilSystem &sys, const KSpace &y, const ComplexImage &x_blind)
{
  switch (spec.kind) {
  case PipelineKind::supervised:
  case PipelineKind::p1:
    return unroll_forward(params.theta, x_blind, sys, y, spec.supervised);
  case PipelineKind::p2:
    return unroll_forward(params.theta, x_blind, sys, y, spec.supervised, Coupling::anchored, &x_blind);
  case PipelineKind::p3:
    break;
  }
  throw InvalidArgument("run_pipeline_from_blind: P3 has no standalone blind stage");
}

ComplexImage run_pipeline(const PipelineSpec &spec, const PipelineParams &params, const MultiCoilSystem &sys,
                          const KSpace &y)
{
  spec.validate();
  switch (spec.kind) {
  case PipelineKind::supervised:
    return supervised_recon(params.theta, sys, y, spec.supervised);
  case PipelineKind::p1:
  case PipelineKind::p2: {
    const ComplexImage x_blind = blind_recon(sys, y, spec.blind, spec.patch);
    return run_pipeline_from_blind(spec, params, sys, y, x_blind);
  }
  case PipelineKind::p3: {
    const ComplexImage first = supervised_recon(params.theta, sys, y, spec.supervised);
    const ComplexImage primed = blind_iterations(sys, y, first, spec.blind, spec.patch, AtomUpdate::learn);
    return unroll_forward(params.theta2, primed, sys, y, spec.supervised2);
  }
  }
  throw InvalidArgument("run_pipeline: unknown pipeline kind");
}

PipelineKind parse_pipeline_kind(const std::string &name)
{
  if (name == "s" || name == "supervised") {
    return PipelineKind::supervised;
  }
  if (name == "p1" || name == "blips-p1") {
    return PipelineKind::p1;
  }
  if (name == "p2" || name == "blips-p2") {
    return PipelineKind::p2;
  }
  if (name == "p3" || name == "blips-p3") {
    return PipelineKind::p3;
  }
  throw InvalidArgument("unknown pipeline '" + name + "'");
}

std::string to_string(PipelineKind kind)
{
  switch (kind) {
  case PipelineKind::supervised:
    return "supervised";
  case PipelineKind::p1:
    return "blips-p1";
  case PipelineKind::p2:
    return "blips-p2";
  case PipelineKind::p3:
    return "blips-p3";
  }
  return "unknown";
}

} // namespace blips
