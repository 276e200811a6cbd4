#pragma once

#include <vector>

#include "blips/cg.hpp"
#include "blips/dictionary.hpp"
#include "blips/multicoil.hpp"

namespace blips {

struct ReconConfig
{
  double nu = 8e-4;
  double lambda = 0.2;
  std::size_t outer_iters = 20;
  std::size_t inner_iters = 5;
  std::size_t cg_iters = 30;
  double cg_tol = 1e-6;
  std::size_t n_atoms = 144;

  void validate() const;
};

// Per outer iteration of a blind reconstruction.
struct BlindTrace
{
  // Full objective after each image update, preceded by its value at the start.
  std::vector<double> objective;
  std::vector<CgReport> cg;
};

// nu sum_c ||A_c x - y_c||^2 + sum_j ||P_j x - D e_j||^2 + lambda^2 ||Z||_0
double blind_objective(const MultiCoilSystem &sys, const KSpace &y, const ComplexImage &x, const Dictionary &dict,
                       const SparseCodes &codes, const ReconConfig &cfg, const PatchConfig &pcfg);

// Solves (nu A^H A + r I) x = nu A^H y + aggregate(D Z).
CgResult blind_image_update(const MultiCoilSystem &sys, const KSpace &y, const Dictionary &dict,
                            const SparseCodes &codes, const ReconConfig &cfg, const PatchConfig &pcfg);
// Warm-started from `current`.
CgResult blind_image_update(const MultiCoilSystem &sys, const KSpace &y, const Dictionary &dict,
                            const SparseCodes &codes, const ReconConfig &cfg, const PatchConfig &pcfg,
                            const ComplexImage &current);

// K outer iterations of (inner_iters dictionary sweeps, image update) from x0.
// The dictionary starts at the overcomplete IDCT and the codes at zero.
ComplexImage blind_iterations(const MultiCoilSystem &sys, const KSpace &y, const ComplexImage &x0,
                              const ReconConfig &cfg, const PatchConfig &pcfg, AtomUpdate mode,
                              BlindTrace *trace = nullptr);

// From the zero-filled reconstruction.
ComplexImage blind_recon(const MultiCoilSystem &sys, const KSpace &y, const ReconConfig &cfg,
                         const PatchConfig &pcfg, BlindTrace *trace = nullptr);
ComplexImage fixed_dict_recon(const MultiCoilSystem &sys, const KSpace &y, const ReconConfig &cfg,
                              const PatchConfig &pcfg, BlindTrace *trace = nullptr);

} // namespace blips
