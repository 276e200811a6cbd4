#pragma once

#include <Eigen/Dense>

#include "blips/complex_image.hpp"

namespace blips {

// Square patches, stride 1, periodic wrap: every pixel anchors one patch, so
// the aggregate of the extraction is patch_length() times the identity.
struct PatchConfig
{
  std::size_t patch_side = 6;
  std::size_t stride = 1;

  std::size_t patch_length() const { return patch_side * patch_side; }
};

// r x N, column j = patch anchored at pixel j (row-major), entry dr*side+dc.
using PatchMatrix = Eigen::MatrixXcd;

PatchMatrix extract_patches(const ComplexImage &x, const PatchConfig &cfg);
// Adjoint of extract_patches.
ComplexImage aggregate_patches(const PatchMatrix &patches, const PatchConfig &cfg, std::size_t height,
                               std::size_t width);

} // namespace blips
