#pragma once

// Single-threaded reference versions of the OpenMP kernels. They use the
// direct (scatter) formulation and exist for cross-checking and benchmarks.

#include "blips/conv.hpp"
#include "blips/multicoil.hpp"
#include "blips/patches.hpp"

namespace blips::kernels::serial {

PatchMatrix extract_patches(const ComplexImage &x, const PatchConfig &cfg);
ComplexImage aggregate_patches(const PatchMatrix &patches, const PatchConfig &cfg, std::size_t height,
                               std::size_t width);

FeatureMap conv3x3_forward(const ConvLayer &layer, const FeatureMap &input);
FeatureMap conv3x3_backward_input(const ConvLayer &layer, const FeatureMap &grad_out);
void conv3x3_backward_params(const FeatureMap &input, const FeatureMap &grad_out, ConvLayer &grad);

// Row vector d^H P.
Eigen::RowVectorXcd atom_correlation(const Eigen::VectorXcd &atom, const PatchMatrix &patches);

ComplexImage apply_normal(const MultiCoilSystem &sys, const ComplexImage &x);

} // namespace blips::kernels::serial
