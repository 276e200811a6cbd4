#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blips/complex_image.hpp"
#include "blips/conv.hpp"

namespace blips {

// Residual CNN D_theta: 2 -> C -> ... -> C -> 2 channels, 3x3 periodic
// convolutions with ReLU between layers. The caller adds the input back.
struct DenoiserParams
{
  std::vector<kernels::ConvLayer> layers;
  std::uint64_t seed = 0;

  std::size_t channels() const { return layers.front().out_channels; }
  std::size_t depth() const { return layers.size(); }
  std::size_t parameter_count() const;
  std::string architecture() const;

  // Weights uniform in +-1/sqrt(fan_in), biases zero.
  static DenoiserParams init(std::size_t channels, std::uint64_t seed, std::size_t depth = 3);
  static DenoiserParams zeros(std::size_t channels, std::size_t depth = 3);
  DenoiserParams zeros_like() const;

  // Weight and bias tensors in a fixed order.
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;

  void validate() const;
  bool operator==(const DenoiserParams &) const = default;
};


enum class ScaleSource
{
  median,
  mean,
  unit,
};

// Input normalization: the network sees x / scale and its output is
// multiplied back by scale.
struct NormContext
{
  double scale = 1.0;
  ScaleSource source = ScaleSource::unit;
  std::size_t median_index = 0;
};

// Lower median of |x|; falls back to mean |x| when that median is zero and to
// 1 for an identically zero image.
NormContext normalization_scale(const ComplexImage &x);

ComplexImage denoiser_forward(const DenoiserParams &params, const ComplexImage &x);

struct DenoiserGradients
{
  DenoiserParams params;
  ComplexImage input;
};

// Gradients of Re<upstream, denoiser_forward(params, x)>; complex gradients
// are d/dRe + i d/dIm.
DenoiserGradients denoiser_backward(const DenoiserParams &params, const ComplexImage &x,
                                    const ComplexImage &upstream);

void add_scaled(DenoiserParams &acc, const DenoiserParams &grad, double alpha);
double dot(const DenoiserParams &a, const DenoiserParams &b);

} // namespace blips
