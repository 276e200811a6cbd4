#pragma once

#include "blips/complex_image.hpp"

namespace blips {

// Centered (DC at index (h/2, w/2)), unitary 2D DFT.
ComplexImage fft2c(const ComplexImage &img);
ComplexImage ifft2c(const ComplexImage &ksp);

} // namespace blips
