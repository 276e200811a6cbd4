#pragma once

#include <cstdint>

#include "blips/multicoil.hpp"

namespace blips {

enum class MaskKind
{
  variable_density_1d,
  poisson_disk_2d,
  equidistant_1d,
};

struct MaskSpec
{
  MaskKind kind = MaskKind::variable_density_1d;
  std::size_t height = 0;
  std::size_t width = 0;
  double acceleration = 1.0;
  std::size_t acs_lines = 0; // variable_density_1d
  double acs_fraction = 0.0; // equidistant_1d
  std::uint64_t seed = 0;
};

// Sampled phase-encode lines are full columns.
SamplingMask mask_1d_variable_density(const MaskSpec &spec);

struct PoissonDiskResult
{
  SamplingMask mask;
  double radius = 0.0;
  std::size_t acs_side = 0;
};

SamplingMask mask_poisson_disk_2d(const MaskSpec &spec);
// Same as mask_poisson_disk_2d but also reports the calibrated radius and ACS size.
PoissonDiskResult mask_poisson_disk_2d_detailed(const MaskSpec &spec);

SamplingMask mask_equidistant(const MaskSpec &spec);

SamplingMask make_mask(const MaskSpec &spec);

// Columns [first, first + count) of the centered ACS band.
std::size_t centered_start(std::size_t extent, std::size_t count);

MaskKind parse_mask_kind(const std::string &name);
std::string to_string(MaskKind kind);

} // namespace blips
