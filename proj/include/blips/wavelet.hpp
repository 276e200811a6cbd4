#pragma once

#include "blips/complex_image.hpp"

namespace blips {

// Orthogonal 2D periodic DWT with the 8-tap Daubechies filter (db4), Mallat
// layout: coarsest approximation in the top-left corner.
class Wavelet2D
{
public:
  explicit Wavelet2D(std::size_t levels = 3) : levels_(levels) {}

  std::size_t levels() const { return levels_; }

  // Both dimensions must be divisible by 2^levels.
  ComplexImage forward(const ComplexImage &x) const;
  ComplexImage inverse(const ComplexImage &coeffs) const;

private:
  std::size_t levels_;
};

} // namespace blips
