#include "blips/blind_recon.hpp"

#include <cmath>

#include "blips/errors.hpp"

namespace blips {

void ReconConfig::validate() const
{
  require(nu >= 0.0 && std::isfinite(nu), "ReconConfig: nu must be >= 0");
  require(lambda > 0.0 && std::isfinite(lambda), "ReconConfig: lambda must be > 0");
  require(inner_iters >= 1, "ReconConfig: inner_iters must be >= 1");
  require(cg_iters >= 1, "ReconConfig: cg_iters must be >= 1");
  require(cg_tol >= 0.0, "ReconConfig: cg_tol must be >= 0");
  require(n_atoms >= 1, "ReconConfig: n_atoms must be >= 1");
}

double blind_objective(const MultiCoilSystem &sys, const KSpace &y, const ComplexImage &x, const Dictionary &dict,
                       const SparseCodes &codes, const ReconConfig &cfg, const PatchConfig &pcfg)
{
  KSpace residual = apply_forward(sys, x);
  for (std::size_t c = 0; c < residual.size(); ++c) {
    residual[c] -= y[c];
  }
  return cfg.nu * norm2_squared(residual) + dl_objective(extract_patches(x, pcfg), dict, codes, cfg.lambda);
}

CgResult blind_image_update(const MultiCoilSystem &sys, const KSpace &y, const Dictionary &dict,
                            const SparseCodes &codes, const ReconConfig &cfg, const PatchConfig &pcfg)
{
  return blind_image_update(sys, y, dict, codes, cfg, pcfg, ComplexImage(sys.shape()));
}

CgResult blind_image_update(const MultiCoilSystem &sys, const KSpace &y, const Dictionary &dict,
                            const SparseCodes &codes, const ReconConfig &cfg, const PatchConfig &pcfg,
                            const ComplexImage &current)
{
  const auto h = sys.shape().height;
  const auto w = sys.shape().width;
  const double r = static_cast<double>(pcfg.patch_length());
  ComplexImage rhs = aggregate_patches(synthesize(dict, codes), pcfg, h, w);
  if (cfg.nu != 0.0) {
    rhs.axpy(cfg.nu, apply_adjoint(sys, y));
  }
  const double nu = cfg.nu;
  const LinearOperator normal = [&](const ComplexImage &v) {
    ComplexImage out = r * v;
    if (nu != 0.0) {
      out.axpy(nu, apply_normal(sys, v));
    }
    return out;
  };
  return cg_solve(normal, rhs, current, cfg.cg_tol, cfg.cg_iters);
}

ComplexImage blind_iterations(const MultiCoilSystem &sys, const KSpace &y, const ComplexImage &x0,
                              const ReconConfig &cfg, const PatchConfig &pcfg, AtomUpdate mode, BlindTrace *trace)
{
  cfg.validate();
  require(x0.shape() == sys.shape(), "blind_iterations: initial image shape mismatch");
  ComplexImage x = x0;
  if (cfg.outer_iters == 0) {
    return x;
  }
  const std::size_t n_patches = x.size();
  Dictionary dict = init_overcomplete_idct(pcfg.patch_length(), cfg.n_atoms);
  SparseCodes codes(cfg.n_atoms, n_patches);
  if (trace != nullptr) {
    trace->objective.push_back(blind_objective(sys, y, x, dict, codes, cfg, pcfg));
  }
  for (std::size_t outer = 0; outer < cfg.outer_iters; ++outer) {
    const PatchMatrix patches = extract_patches(x, pcfg);
    SoupDilSweep sweep(patches, dict, codes, cfg.lambda, mode);
    for (std::size_t inner = 0; inner < cfg.inner_iters; ++inner) {
      sweep.run();
    }
    CgResult update = blind_image_update(sys, y, dict, codes, cfg, pcfg, x);
    x = std::move(update.x);
    if (!all_finite(x)) {
      throw NumericFailure("blind reconstruction produced non-finite values");
    }
    if (trace != nullptr) {
      trace->objective.push_back(blind_objective(sys, y, x, dict, codes, cfg, pcfg));
      trace->cg.push_back(std::move(update.report));
    }
  }
  return x;
}

ComplexImage blind_recon(const MultiCoilSystem &sys, const KSpace &y, const ReconConfig &cfg,
                         const PatchConfig &pcfg, BlindTrace *trace)
{
  return blind_iterations(sys, y, zero_filled_recon(sys, y), cfg, pcfg, AtomUpdate::learn, trace);
}

ComplexImage fixed_dict_recon(const MultiCoilSystem &sys, const KSpace &y, const ReconConfig &cfg,
                              const PatchConfig &pcfg, BlindTrace *trace)
{
  return blind_iterations(sys, y, zero_filled_recon(sys, y), cfg, pcfg, AtomUpdate::fixed, trace);
}

} // namespace blips
