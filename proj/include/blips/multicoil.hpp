#pragma once

#include <cstdint>
#include <vector>

#include "blips/complex_image.hpp"

namespace blips {

// Boolean k-space sampling grid; true = acquired.
class SamplingMask
{
public:
  SamplingMask() = default;
  SamplingMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> keep);
  static SamplingMask full(std::size_t height, std::size_t width);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  Shape shape() const { return {height_, width_}; }
  std::size_t size() const { return keep_.size(); }

  bool operator()(std::size_t row, std::size_t col) const { return keep_[row * width_ + col] != 0; }
  bool operator[](std::size_t i) const { return keep_[i] != 0; }
  const std::vector<std::uint8_t> &keep() const { return keep_; }

  std::size_t count() const;
  double fraction() const;

  // Zeros unsampled entries in place.
  void apply(ComplexImage &ksp) const;

  bool operator==(const SamplingMask &) const = default;

private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> keep_;
};

enum class SosPolicy
{
  reject,    // throw if sum_c |V_c|^2 deviates from 1 by more than 1e-3
  normalize, // rescale pixelwise to unit sum of squares
};

class CoilSet
{
public:
  CoilSet() = default;
  explicit CoilSet(std::vector<ComplexImage> maps, SosPolicy policy = SosPolicy::reject);

  std::size_t n_coils() const { return maps_.size(); }
  Shape shape() const { return maps_.front().shape(); }
  const ComplexImage &operator[](std::size_t c) const { return maps_[c]; }
  const std::vector<ComplexImage> &maps() const { return maps_; }

  // Largest pixelwise |sum_c |V_c|^2 - 1|.
  double sos_deviation() const;

private:
  std::vector<ComplexImage> maps_;
};

using KSpace = std::vector<ComplexImage>;

// Realizes A_c = P F V_c for every coil c.
class MultiCoilSystem
{
public:
  MultiCoilSystem() = default;
  MultiCoilSystem(CoilSet coils, SamplingMask mask);

  const CoilSet &coils() const { return coils_; }
  const SamplingMask &mask() const { return mask_; }
  Shape shape() const { return mask_.shape(); }
  std::size_t n_coils() const { return coils_.n_coils(); }

private:
  CoilSet coils_;
  SamplingMask mask_;
};

KSpace apply_forward(const MultiCoilSystem &sys, const ComplexImage &x);
ComplexImage apply_adjoint(const MultiCoilSystem &sys, const KSpace &y);
// A^H A x without materializing the k-space list.
ComplexImage apply_normal(const MultiCoilSystem &sys, const ComplexImage &x);
ComplexImage zero_filled_recon(const MultiCoilSystem &sys, const KSpace &y);

// sum_c <a_c, b_c>
cplx inner(const KSpace &a, const KSpace &b);
double norm2_squared(const KSpace &a);

} // namespace blips
