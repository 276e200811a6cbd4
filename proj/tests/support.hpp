#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "blips/complex_image.hpp"
#include "blips/masks.hpp"
#include "blips/multicoil.hpp"
#include "blips/phantom.hpp"
#include "blips/random.hpp"

namespace testing {

using blips::cplx;
using blips::ComplexImage;

inline double max_abs_diff(const ComplexImage &a, const ComplexImage &b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

inline blips::SamplingMask random_mask(std::size_t h, std::size_t w, double keep, blips::Rng &rng)
{
  std::vector<std::uint8_t> k(h * w);
  for (auto &v : k) {
    v = rng.uniform() < keep ? 1 : 0;
  }
  k[0] = 1;
  return blips::SamplingMask(h, w, std::move(k));
}

inline blips::CoilSet random_coils(std::size_t h, std::size_t w, std::size_t n, blips::Rng &rng)
{
  std::vector<ComplexImage> maps;
  for (std::size_t c = 0; c < n; ++c) {
    maps.push_back(blips::random_image(h, w, rng));
  }
  return blips::CoilSet(std::move(maps), blips::SosPolicy::normalize);
}

inline blips::MultiCoilSystem random_system(std::size_t h, std::size_t w, std::size_t coils, double keep,
                                            std::uint64_t seed)
{
  blips::Rng rng(seed);
  auto cs = random_coils(h, w, coils, rng);
  auto mask = random_mask(h, w, keep, rng);
  return blips::MultiCoilSystem(std::move(cs), std::move(mask));
}

inline double rel_err(double a, double b, double floor = 1e-12)
{
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

} // namespace testing
