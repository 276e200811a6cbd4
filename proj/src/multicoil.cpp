#include "blips/multicoil.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blips/errors.hpp"
#include "blips/fft.hpp"

namespace blips {

SamplingMask::SamplingMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> keep)
  : height_(height), width_(width), keep_(std::move(keep))
{
  require(height_ > 0 && width_ > 0, "SamplingMask: dimensions must be nonzero");
  require(keep_.size() == height_ * width_, "SamplingMask: keep length must equal height*width");
  for (auto &k : keep_) {
    k = k != 0 ? 1 : 0;
  }
  require(count() > 0, "SamplingMask: at least one location must be sampled");
}

SamplingMask SamplingMask::full(std::size_t height, std::size_t width)
{
  return SamplingMask(height, width, std::vector<std::uint8_t>(height * width, 1));
}

std::size_t SamplingMask::count() const
{
  return static_cast<std::size_t>(std::count(keep_.begin(), keep_.end(), std::uint8_t{1}));
}

double SamplingMask::fraction() const
{
  return static_cast<double>(count()) / static_cast<double>(keep_.size());
}

void SamplingMask::apply(ComplexImage &ksp) const
{
  require(ksp.shape() == shape(), "SamplingMask::apply: shape mismatch");
  for (std::size_t i = 0; i < keep_.size(); ++i) {
    if (keep_[i] == 0) {
      ksp[i] = cplx{};
    }
  }
}

CoilSet::CoilSet(std::vector<ComplexImage> maps, SosPolicy policy) : maps_(std::move(maps))
{
  require(!maps_.empty(), "CoilSet: at least one coil map is required");
  const Shape s = maps_.front().shape();
  require(s.size() > 0, "CoilSet: maps must be nonempty");
  for (const auto &m : maps_) {
    require(m.shape() == s, "CoilSet: all maps must share one shape");
    require(all_finite(m), "CoilSet: maps must be finite");
  }
  if (policy == SosPolicy::reject) {
    const double dev = sos_deviation();
    if (dev > 1e-3) {
      throw InvalidArgument("CoilSet: maps are not sum-of-squares normalized (deviation " + std::to_string(dev) +
                            ")");
    }
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    double sos = 0.0;
    for (const auto &m : maps_) {
      sos += std::norm(m[i]);
    }
    require(sos > 0.0, "CoilSet: sum of squares vanishes at a pixel");
    const double inv = 1.0 / std::sqrt(sos);
    for (auto &m : maps_) {
      m[i] *= inv;
    }
  }
}

double CoilSet::sos_deviation() const
{
  double worst = 0.0;
  const std::size_t n = maps_.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    double sos = 0.0;
    for (const auto &m : maps_) {
      sos += std::norm(m[i]);
    }
    worst = std::max(worst, std::abs(sos - 1.0));
  }
  return worst;
}

MultiCoilSystem::MultiCoilSystem(CoilSet coils, SamplingMask mask) : coils_(std::move(coils)), mask_(std::move(mask))
{
  require(coils_.n_coils() > 0, "MultiCoilSystem: no coils");
  require(coils_.shape() == mask_.shape(), "MultiCoilSystem: coil and mask dimensions disagree");
}

KSpace apply_forward(const MultiCoilSystem &sys, const ComplexImage &x)
{
  require(x.shape() == sys.shape(), "apply_forward: image shape does not match system");
  const auto nc = static_cast<std::ptrdiff_t>(sys.n_coils());
  KSpace y(sys.n_coils());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const ComplexImage &map = sys.coils()[c];
    ComplexImage coil_img(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) {
      coil_img[i] = map[i] * x[i];
    }
    ComplexImage ksp = fft2c(coil_img);
    sys.mask().apply(ksp);
    y[c] = std::move(ksp);
  }
  return y;
}

ComplexImage apply_adjoint(const MultiCoilSystem &sys, const KSpace &y)
{
  if (y.size() != sys.n_coils()) {
    throw InvalidArgument("apply_adjoint: expected " + std::to_string(sys.n_coils()) + " coil grids, got " +
                          std::to_string(y.size()));
  }
  for (const auto &yc : y) {
    require(yc.shape() == sys.shape(), "apply_adjoint: k-space shape does not match system");
  }
  const auto nc = static_cast<std::ptrdiff_t>(sys.n_coils());
  std::vector<ComplexImage> per_coil(sys.n_coils());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    ComplexImage ksp = y[c];
    sys.mask().apply(ksp);
    ComplexImage img = ifft2c(ksp);
    const ComplexImage &map = sys.coils()[c];
    for (std::size_t i = 0; i < img.size(); ++i) {
      img[i] = std::conj(map[i]) * img[i];
    }
    per_coil[c] = std::move(img);
  }
  // fixed coil order keeps the sum deterministic
  ComplexImage out(sys.shape());
  for (const auto &img : per_coil) {
    out += img;
  }
  return out;
}

ComplexImage apply_normal(const MultiCoilSystem &sys, const ComplexImage &x)
{
  require(x.shape() == sys.shape(), "apply_normal: image shape does not match system");
  const auto nc = static_cast<std::ptrdiff_t>(sys.n_coils());
  std::vector<ComplexImage> per_coil(sys.n_coils());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const ComplexImage &map = sys.coils()[c];
    ComplexImage img(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) {
      img[i] = map[i] * x[i];
    }
    ComplexImage ksp = fft2c(img);
    sys.mask().apply(ksp);
    img = ifft2c(ksp);
    for (std::size_t i = 0; i < img.size(); ++i) {
      img[i] = std::conj(map[i]) * img[i];
    }
    per_coil[c] = std::move(img);
  }
  ComplexImage out(sys.shape());
  for (const auto &img : per_coil) {
    out += img;
  }
  return out;
}

ComplexImage zero_filled_recon(const MultiCoilSystem &sys, const KSpace &y) { return apply_adjoint(sys, y); }

cplx inner(const KSpace &a, const KSpace &b)
{
  require(a.size() == b.size(), "inner: coil count mismatch");
  cplx acc{};
  for (std::size_t c = 0; c < a.size(); ++c) {
    acc += inner(a[c], b[c]);
  }
  return acc;
}

double norm2_squared(const KSpace &a)
{
  double acc = 0.0;
  for (const auto &k : a) {
    acc += norm2_squared(k);
  }
  return acc;
}

} // namespace blips
