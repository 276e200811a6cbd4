#pragma once

#include <vector>

#include "blips/blind_recon.hpp"
#include "blips/denoiser.hpp"
#include "blips/multicoil.hpp"

namespace blips {

struct SupervisedConfig
{
  double nu = 2.0;
  std::size_t unrolls = 3;
  std::size_t cg_iters = 30;
  double cg_tol = 1e-6;

  void validate() const;
};

// How the denoiser output enters the data-consistency solve.
enum class Coupling
{
  residual, // z = x_l + D(x_l)
  anchored, // z = anchor + D(x_l); the anchor is the blind image
};

// x_{l+1} = argmin_x nu ||A x - y||^2 + ||x - z||^2, i.e. (nu A^H A + I) x = nu A^H y + z.
ComplexImage data_consistency(const MultiCoilSystem &sys, const KSpace &y, const ComplexImage &z,
                              const SupervisedConfig &scfg);
// Applies (nu A^H A + I)^{-1}; self-adjoint, so it also maps gradients back through the solve.
ComplexImage solve_normal(const MultiCoilSystem &sys, const ComplexImage &rhs, const SupervisedConfig &scfg);

ComplexImage supervised_iteration(const DenoiserParams &params, const ComplexImage &x, const MultiCoilSystem &sys,
                                  const KSpace &y, const SupervisedConfig &scfg);
ComplexImage anchored_iteration(const DenoiserParams &params, const ComplexImage &x, const ComplexImage &anchor,
                                const MultiCoilSystem &sys, const KSpace &y, const SupervisedConfig &scfg);

struct IterationGradients
{
  DenoiserParams params;
  ComplexImage input;
};

// Maps dL/dx_{l+1} to (dL/dtheta, dL/dx_l) for one iteration whose input was x.
IterationGradients supervised_iteration_backward(const DenoiserParams &params, const ComplexImage &x,
                                                 const MultiCoilSystem &sys, const SupervisedConfig &scfg,
                                                 const ComplexImage &upstream, Coupling coupling = Coupling::residual);

// Inputs of every unrolled iteration, recorded for the backward pass.
struct UnrollTape
{
  std::vector<ComplexImage> inputs;
};

// L iterations sharing one parameter set. `anchor` is only read for Coupling::anchored.
ComplexImage unroll_forward(const DenoiserParams &params, const ComplexImage &x0, const MultiCoilSystem &sys,
                            const KSpace &y, const SupervisedConfig &scfg, Coupling coupling = Coupling::residual,
                            const ComplexImage *anchor = nullptr, UnrollTape *tape = nullptr);
// Parameter gradients summed over all iterations. The input gradient is taken
// through the iteration chain only (not through the anchor).
IterationGradients unroll_backward(const DenoiserParams &params, const UnrollTape &tape, const MultiCoilSystem &sys,
                                   const SupervisedConfig &scfg, const ComplexImage &upstream,
                                   Coupling coupling = Coupling::residual);

enum class PipelineKind
{
  supervised, // strict supervised: L iterations from the zero-filled image
  p1,         // K blind iterations, then L residual iterations
  p2,         // K blind iterations, then L anchored iterations
  p3,         // L1 iterations (theta1), one blind iteration, L2 iterations (theta2)
};

struct PipelineSpec
{
  PipelineKind kind = PipelineKind::p1;
  ReconConfig blind;
  PatchConfig patch;
  SupervisedConfig supervised;
  SupervisedConfig supervised2; // P3 second stage

  static PipelineSpec make(PipelineKind kind);
  void validate() const;
};

struct PipelineParams
{
  DenoiserParams theta;
  DenoiserParams theta2; // P3 only
};

// Strict supervised path: unroll from the zero-filled reconstruction.
ComplexImage supervised_recon(const DenoiserParams &params, const MultiCoilSystem &sys, const KSpace &y,
                              const SupervisedConfig &scfg);

ComplexImage run_pipeline(const PipelineSpec &spec, const PipelineParams &params, const MultiCoilSystem &sys,
                          const KSpace &y);
// Same, with the blind stage output supplied by the caller (P1/P2).
ComplexImage run_pipeline_from_blind(const PipelineSpec &spec, const PipelineParams &params,
                                     const MultiCoilSystem &sys, const KSpace &y, const ComplexImage &x_blind);

PipelineKind parse_pipeline_kind(const std::string &name);
std::string to_string(PipelineKind kind);

} // namespace blips
