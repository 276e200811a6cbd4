#pragma once

#include <cstddef>
#include <vector>

namespace blips::kernels {

// channels x height x width, channel-major.
struct FeatureMap
{
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(std::size_t c, std::size_t h, std::size_t w) : channels(c), height(h), width(w), data(c * h * w) {}

  double &at(std::size_t c, std::size_t r, std::size_t col) { return data[(c * height + r) * width + col]; }
  double at(std::size_t c, std::size_t r, std::size_t col) const { return data[(c * height + r) * width + col]; }
  std::size_t plane() const { return height * width; }
  double *row(std::size_t c, std::size_t r) { return data.data() + (c * height + r) * width; }
  const double *row(std::size_t c, std::size_t r) const { return data.data() + (c * height + r) * width; }
};

// 3x3 cross-correlation with periodic padding.
struct ConvLayer
{
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::vector<double> weight; // [out][in][ky][kx]
  std::vector<double> bias;   // [out]

  ConvLayer() = default;
  ConvLayer(std::size_t in, std::size_t out) : in_channels(in), out_channels(out), weight(out * in * 9), bias(out) {}
  bool operator==(const ConvLayer &) const = default;

  double &w(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) { return weight[((o * in_channels + i) * 3 + ky) * 3 + kx]; }
  double w(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const { return weight[((o * in_channels + i) * 3 + ky) * 3 + kx]; }
};

FeatureMap conv3x3_forward(const ConvLayer &layer, const FeatureMap &input);
// Gradient w.r.t. the layer input given the gradient w.r.t. its output.
FeatureMap conv3x3_backward_input(const ConvLayer &layer, const FeatureMap &grad_out);
// Accumulates (+=) weight and bias gradients.
void conv3x3_backward_params(const FeatureMap &input, const FeatureMap &grad_out, ConvLayer &grad);

} // namespace blips::kernels
