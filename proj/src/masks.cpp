#include "blips/masks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "blips/errors.hpp"
#include "blips/random.hpp"

namespace blips {
namespace {

void validate(const MaskSpec &spec, MaskKind expected, const char *who)
{
  require(spec.kind == expected, std::string(who) + ": wrong mask kind");
  require(spec.height > 0 && spec.width > 0, std::string(who) + ": dimensions must be nonzero");
  require(std::isfinite(spec.acceleration) && spec.acceleration >= 1.0,
          std::string(who) + ": acceleration must be >= 1");
}

SamplingMask from_columns(std::size_t height, std::size_t width, const std::vector<std::uint8_t> &columns)
{
  std::vector<std::uint8_t> keep(height * width);
  for (std::size_t r = 0; r < height; ++r) {
    std::copy(columns.begin(), columns.end(), keep.begin() + static_cast<std::ptrdiff_t>(r * width));
  }
  return SamplingMask(height, width, std::move(keep));
}

// Dart throwing over a fixed candidate order; rejects a candidate closer than
// `radius` to any accepted non-ACS sample and stops once `limit` samples
// (ACS included) are set.
class DartThrower
{
public:
  DartThrower(std::size_t height, std::size_t width, std::size_t acs_side, std::uint64_t seed)
    : height_(height), width_(width), acs_(height * width, 0)
  {
    const std::size_t r0 = centered_start(height, acs_side);
    const std::size_t c0 = centered_start(width, acs_side);
    for (std::size_t r = r0; r < r0 + acs_side; ++r) {
      for (std::size_t c = c0; c < c0 + acs_side; ++c) {
        acs_[r * width + c] = 1;
      }
    }
    for (std::size_t i = 0; i < height * width; ++i) {
      if (acs_[i] == 0) {
        order_.push_back(static_cast<std::uint32_t>(i));
      }
    }
    Rng rng(seed);
    rng.shuffle(order_.begin(), order_.end());
  }

  std::vector<std::uint8_t> throw_darts(double radius, std::size_t limit) const
  {
    std::vector<std::uint8_t> keep = acs_;
    std::size_t count = static_cast<std::size_t>(std::count(acs_.begin(), acs_.end(), std::uint8_t{1}));
    const double cell = std::max(1.0, std::ceil(radius));
    const auto gh = static_cast<std::size_t>(std::ceil(static_cast<double>(height_) / cell));
    const auto gw = static_cast<std::size_t>(std::ceil(static_cast<double>(width_) / cell));
    std::vector<std::vector<std::uint32_t>> buckets(gh * gw);
    const double r2 = radius * radius;
    for (const std::uint32_t idx : order_) {
      if (count >= limit) {
        break;
      }
      const auto row = static_cast<std::ptrdiff_t>(idx / width_);
      const auto col = static_cast<std::ptrdiff_t>(idx % width_);
      const auto br = static_cast<std::ptrdiff_t>(static_cast<double>(row) / cell);
      const auto bc = static_cast<std::ptrdiff_t>(static_cast<double>(col) / cell);
      bool ok = true;
      for (std::ptrdiff_t dr = -1; dr <= 1 && ok; ++dr) {
        for (std::ptrdiff_t dc = -1; dc <= 1 && ok; ++dc) {
          const std::ptrdiff_t nr = br + dr;
          const std::ptrdiff_t nc = bc + dc;
          if (nr < 0 || nc < 0 || nr >= static_cast<std::ptrdiff_t>(gh) || nc >= static_cast<std::ptrdiff_t>(gw)) {
            continue;
          }
          for (const std::uint32_t other : buckets[static_cast<std::size_t>(nr) * gw + static_cast<std::size_t>(nc)]) {
            const double er = static_cast<double>(row) - static_cast<double>(other / width_);
            const double ec = static_cast<double>(col) - static_cast<double>(other % width_);
            if (er * er + ec * ec < r2) {
              ok = false;
              break;
            }
          }
        }
      }
      if (ok) {
        keep[idx] = 1;
        ++count;
        buckets[static_cast<std::size_t>(br) * gw + static_cast<std::size_t>(bc)].push_back(idx);
      }
    }
    return keep;
  }

private:
  std::size_t height_;
  std::size_t width_;
  std::vector<std::uint8_t> acs_;
  std::vector<std::uint32_t> order_;
};

double sampled_fraction(const std::vector<std::uint8_t> &keep)
{
  return static_cast<double>(std::count(keep.begin(), keep.end(), std::uint8_t{1})) /
         static_cast<double>(keep.size());
}

} // namespace

std::size_t centered_start(std::size_t extent, std::size_t count)
{
  const std::size_t center = extent / 2;
  const std::size_t half = count / 2;
  return center >= half ? std::min(center - half, extent - std::min(count, extent)) : 0;
}

SamplingMask mask_1d_variable_density(const MaskSpec &spec)
{
  validate(spec, MaskKind::variable_density_1d, "mask_1d_variable_density");
  require(spec.acs_lines <= spec.width, "mask_1d_variable_density: acs_lines exceeds width");
  const auto total = static_cast<std::size_t>(std::llround(static_cast<double>(spec.width) / spec.acceleration));
  if (total < spec.acs_lines) {
    throw InvalidArgument("mask_1d_variable_density: round(width/acceleration) = " + std::to_string(total) +
                          " is smaller than acs_lines = " + std::to_string(spec.acs_lines));
  }
  std::vector<std::uint8_t> columns(spec.width, 0);
  const std::size_t c0 = centered_start(spec.width, spec.acs_lines);
  for (std::size_t c = c0; c < c0 + spec.acs_lines; ++c) {
    columns[c] = 1;
  }
  std::vector<std::size_t> outside;
  for (std::size_t c = 0; c < spec.width; ++c) {
    if (columns[c] == 0) {
      outside.push_back(c);
    }
  }
  // partial Fisher-Yates: uniform selection without replacement
  Rng rng(spec.seed);
  const std::size_t extra = total - spec.acs_lines;
  for (std::size_t i = 0; i < extra; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(outside.size() - i));
    std::swap(outside[i], outside[j]);
    columns[outside[i]] = 1;
  }
  return from_columns(spec.height, spec.width, columns);
}

PoissonDiskResult mask_poisson_disk_2d_detailed(const MaskSpec &spec)
{
  validate(spec, MaskKind::poisson_disk_2d, "mask_poisson_disk_2d");
  const std::size_t acs_side =
    static_cast<std::size_t>(std::ceil(0.02 * static_cast<double>(std::min(spec.height, spec.width))));
  const DartThrower thrower(spec.height, spec.width, acs_side, spec.seed);

  const double target = 1.0 / spec.acceleration;
  const double n = static_cast<double>(spec.height * spec.width);
  const auto limit = static_cast<std::size_t>(std::llround(target * n));
  const double lo_frac = 0.9 * target;

  // Jammed on-grid densities only take a few discrete values, so throwing
  // stops at the target count. Bisection then looks for the widest radius
  // that still reaches the target.
  double lo = 1.0;
  double hi = static_cast<double>(std::max(spec.height, spec.width));
  double radius = 0.0;
  std::vector<std::uint8_t> keep;
  double frac = 0.0;
  for (int step = 0; step < 50; ++step) {
    const double r = step == 0 ? 1.0 : 0.5 * (lo + hi);
    auto trial = thrower.throw_darts(r, limit);
    const double f = sampled_fraction(trial);
    frac = f;
    if (f >= lo_frac) {
      lo = r;
      radius = r;
      keep = std::move(trial);
    } else {
      hi = r;
    }
  }
  if (keep.empty()) {
    throw GenerationFailure("mask_poisson_disk_2d: target density " + std::to_string(target) +
                            " not reached after 50 bisection steps (last fraction " + std::to_string(frac) + ")");
  }
  return {SamplingMask(spec.height, spec.width, std::move(keep)), radius, acs_side};
}

SamplingMask mask_poisson_disk_2d(const MaskSpec &spec) { return mask_poisson_disk_2d_detailed(spec).mask; }

SamplingMask mask_equidistant(const MaskSpec &spec)
{
  validate(spec, MaskKind::equidistant_1d, "mask_equidistant");
  require(spec.acceleration == std::floor(spec.acceleration), "mask_equidistant: acceleration must be an integer");
  require(spec.acs_fraction >= 0.0 && spec.acs_fraction <= 1.0, "mask_equidistant: acs_fraction must be in [0, 1]");
  const auto accel = static_cast<std::uint64_t>(spec.acceleration);
  const double width = static_cast<double>(spec.width);
  const auto n_acs = static_cast<std::size_t>(std::llround(spec.acs_fraction * width));

  std::vector<std::uint8_t> columns(spec.width, 0);
  const std::size_t c0 = centered_start(spec.width, n_acs);
  for (std::size_t c = c0; c < c0 + n_acs; ++c) {
    columns[c] = 1;
  }
  // Lattice spacing is stretched so that ACS plus lattice together sample
  // width/acceleration columns; with no ACS it is exactly `acceleration`.
  const double denom = width - spec.acceleration * static_cast<double>(n_acs);
  if (denom > 0.0) {
    const double spacing = spec.acceleration * (width - static_cast<double>(n_acs)) / denom;
    const auto offset = static_cast<double>(spec.seed % accel);
    for (std::size_t k = 0;; ++k) {
      const auto pos = static_cast<std::size_t>(offset + static_cast<double>(std::llround(static_cast<double>(k) * spacing)));
      if (pos >= spec.width) {
        break;
      }
      columns[pos] = 1;
    }
  }
  return from_columns(spec.height, spec.width, columns);
}

SamplingMask make_mask(const MaskSpec &spec)
{
  switch (spec.kind) {
  case MaskKind::variable_density_1d:
    return mask_1d_variable_density(spec);
  case MaskKind::poisson_disk_2d:
    return mask_poisson_disk_2d(spec);
  case MaskKind::equidistant_1d:
    return mask_equidistant(spec);
  }
  throw InvalidArgument("make_mask: unknown kind");
}

MaskKind parse_mask_kind(const std::string &name)
{
  if (name == "variable_density_1d" || name == "vd1d") {
    return MaskKind::variable_density_1d;
  }
  if (name == "poisson_disk_2d" || name == "poisson") {
    return MaskKind::poisson_disk_2d;
  }
  if (name == "equidistant_1d" || name == "equidistant") {
    return MaskKind::equidistant_1d;
  }
  throw InvalidArgument("unknown mask kind '" + name + "'");
}

std::string to_string(MaskKind kind)
{
  switch (kind) {
  case MaskKind::variable_density_1d:
    return "variable_density_1d";
  case MaskKind::poisson_disk_2d:
    return "poisson_disk_2d";
  case MaskKind::equidistant_1d:
    return "equidistant_1d";
  }
  return "unknown";
}

} // namespace blips
