#include "blips/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "blips/errors.hpp"
#include "blips/random.hpp"

namespace blips {

using kernels::ConvLayer;
using kernels::FeatureMap;

bool operator==(const ConvLayer &a, const ConvLayer &b)
{
  return a.in_channels == b.in_channels && a.out_channels == b.out_channels && a.weight == b.weight &&
         a.bias == b.bias;
}

namespace {

std::vector<std::size_t> channel_plan(std::size_t channels, std::size_t depth)
{
  require(channels >= 1, "DenoiserParams: channel count must be >= 1");
  require(depth >= 2, "DenoiserParams: depth must be >= 2");
  std::vector<std::size_t> plan{2};
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    plan.push_back(channels);
  }
  plan.push_back(2);
  return plan;
}

struct Tape
{
  NormContext norm;
  // activations[0] = normalized input, activations[l] = ReLU output of layer l-1
  std::vector<FeatureMap> activations;
  std::vector<FeatureMap> pre_activations;
};

Tape run_forward(const DenoiserParams &params, const ComplexImage &x)
{
  Tape tape;
  tape.norm = normalization_scale(x);
  const double inv = 1.0 / tape.norm.scale;
  FeatureMap input(2, x.height(), x.width());
  for (std::size_t i = 0; i < x.size(); ++i) {
    input.data[i] = x[i].real() * inv;
    input.data[x.size() + i] = x[i].imag() * inv;
  }
  tape.activations.push_back(std::move(input));
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    FeatureMap pre = kernels::conv3x3_forward(params.layers[l], tape.activations.back());
    if (l + 1 < params.layers.size()) {
      FeatureMap act = pre;
      for (auto &v : act.data) {
        v = std::max(v, 0.0);
      }
      tape.pre_activations.push_back(std::move(pre));
      tape.activations.push_back(std::move(act));
    } else {
      tape.pre_activations.push_back(std::move(pre));
    }
  }
  return tape;
}

} // namespace

std::size_t DenoiserParams::parameter_count() const
{
  std::size_t n = 0;
  for (const auto &l : layers) {
    n += l.weight.size() + l.bias.size();
  }
  return n;
}

std::string DenoiserParams::architecture() const
{
  std::string arch = "c2";
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    arch += layers.size() == 3 ? "-C" : "-" + std::to_string(layers[l].out_channels);
  }
  return arch + "-c2/k3/relu";
}

DenoiserParams DenoiserParams::init(std::size_t channels, std::uint64_t seed, std::size_t depth)
{
  DenoiserParams p = zeros(channels, depth);
  p.seed = seed;
  Rng rng(seed);
  for (auto &layer : p.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_channels * 9));
    for (auto &w : layer.weight) {
      w = rng.uniform(-bound, bound);
    }
  }
  return p;
}

DenoiserParams DenoiserParams::zeros(std::size_t channels, std::size_t depth)
{
  const auto plan = channel_plan(channels, depth);
  DenoiserParams p;
  for (std::size_t l = 0; l + 1 < plan.size(); ++l) {
    p.layers.emplace_back(plan[l], plan[l + 1]);
  }
  return p;
}

DenoiserParams DenoiserParams::zeros_like() const
{
  DenoiserParams p;
  p.seed = seed;
  for (const auto &l : layers) {
    p.layers.emplace_back(l.in_channels, l.out_channels);
  }
  return p;
}

std::vector<std::span<double>> DenoiserParams::tensors()
{
  std::vector<std::span<double>> out;
  for (auto &l : layers) {
    out.emplace_back(l.weight);
    out.emplace_back(l.bias);
  }
  return out;
}

std::vector<std::span<const double>> DenoiserParams::tensors() const
{
  std::vector<std::span<const double>> out;
  for (const auto &l : layers) {
    out.emplace_back(l.weight);
    out.emplace_back(l.bias);
  }
  return out;
}

void DenoiserParams::validate() const
{
  require(layers.size() >= 2, "DenoiserParams: need at least two layers");
  require(layers.front().in_channels == 2, "DenoiserParams: first layer must take 2 channels");
  require(layers.back().out_channels == 2, "DenoiserParams: last layer must produce 2 channels");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto &layer = layers[l];
    require(layer.weight.size() == layer.in_channels * layer.out_channels * 9 &&
              layer.bias.size() == layer.out_channels,
            "DenoiserParams: tensor size mismatch");
    if (l > 0) {
      require(layers[l - 1].out_channels == layer.in_channels, "DenoiserParams: channel chain mismatch");
    }
    for (double v : layer.weight) {
      require(std::isfinite(v), "DenoiserParams: non-finite weight");
    }
    for (double v : layer.bias) {
      require(std::isfinite(v), "DenoiserParams: non-finite bias");
    }
  }
}

NormContext normalization_scale(const ComplexImage &x)
{
  NormContext ctx;
  const std::size_t n = x.size();
  if (n == 0) {
    return ctx;
  }
  std::vector<std::pair<double, std::size_t>> mags(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mags[i] = {std::abs(x[i]), i};
    sum += mags[i].first;
  }
  const auto mid = mags.begin() + static_cast<std::ptrdiff_t>((n - 1) / 2);
  std::nth_element(mags.begin(), mid, mags.end());
  if (mid->first > 0.0) {
    ctx.scale = mid->first;
    ctx.source = ScaleSource::median;
    ctx.median_index = mid->second;
  } else if (sum > 0.0) {
    ctx.scale = sum / static_cast<double>(n);
    ctx.source = ScaleSource::mean;
  }
  return ctx;
}

ComplexImage denoiser_forward(const DenoiserParams &params, const ComplexImage &x)
{
  const Tape tape = run_forward(params, x);
  const FeatureMap &out = tape.pre_activations.back();
  ComplexImage residual(x.height(), x.width());
  const double s = tape.norm.scale;
  for (std::size_t i = 0; i < x.size(); ++i) {
    residual[i] = cplx(out.data[i], out.data[x.size() + i]) * s;
  }
  return residual;
}

DenoiserGradients denoiser_backward(const DenoiserParams &params, const ComplexImage &x,
                                    const ComplexImage &upstream)
{
  require_same_shape(x, upstream, "denoiser_backward");
  const Tape tape = run_forward(params, x);
  const std::size_t n = x.size();
  const double s = tape.norm.scale;

  DenoiserGradients grads{params.zeros_like(), ComplexImage(x.height(), x.width())};

  // r = s * (out0 + i out1)
  FeatureMap grad(2, x.height(), x.width());
  for (std::size_t i = 0; i < n; ++i) {
    grad.data[i] = s * upstream[i].real();
    grad.data[n + i] = s * upstream[i].imag();
  }
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    kernels::conv3x3_backward_params(tape.activations[l], grad, grads.params.layers[l]);
    FeatureMap grad_in = kernels::conv3x3_backward_input(params.layers[l], grad);
    if (l > 0) {
      const FeatureMap &pre = tape.pre_activations[l - 1];
      for (std::size_t k = 0; k < grad_in.data.size(); ++k) {
        if (pre.data[k] <= 0.0) {
          grad_in.data[k] = 0.0;
        }
      }
    }
    grad = std::move(grad_in);
  }

  // grad now holds dL/du for the normalized input u = x / s.
  for (std::size_t i = 0; i < n; ++i) {
    grads.input[i] = cplx(grad.data[i], grad.data[n + i]) / s;
  }

  if (tape.norm.source != ScaleSource::unit) {
    // dL/ds = Re<g, N(u)> - Re<dL/du, x> / s^2
    const FeatureMap &out = tape.pre_activations.back();
    double dl_ds = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dl_ds += upstream[i].real() * out.data[i] + upstream[i].imag() * out.data[n + i];
      dl_ds -= (grad.data[i] * x[i].real() + grad.data[n + i] * x[i].imag()) / (s * s);
    }
    if (tape.norm.source == ScaleSource::median) {
      const std::size_t m = tape.norm.median_index;
      grads.input[m] += dl_ds * x[m] / std::abs(x[m]);
    } else {
      const double per = dl_ds / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double mag = std::abs(x[i]);
        if (mag > 0.0) {
          grads.input[i] += per * x[i] / mag;
        }
      }
    }
  }
  return grads;
}

void add_scaled(DenoiserParams &acc, const DenoiserParams &grad, double alpha)
{
  auto dst = acc.tensors();
  const auto src = grad.tensors();
  require(dst.size() == src.size(), "add_scaled: parameter layout mismatch");
  for (std::size_t t = 0; t < dst.size(); ++t) {
    require(dst[t].size() == src[t].size(), "add_scaled: tensor size mismatch");
    for (std::size_t i = 0; i < dst[t].size(); ++i) {
      dst[t][i] += alpha * src[t][i];
    }
  }
}

double dot(const DenoiserParams &a, const DenoiserParams &b)
{
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  require(ta.size() == tb.size(), "dot: parameter layout mismatch");
  double acc = 0.0;
  for (std::size_t t = 0; t < ta.size(); ++t) {
    for (std::size_t i = 0; i < ta[t].size(); ++i) {
      acc += ta[t][i] * tb[t][i];
    }
  }
  return acc;
}

} // namespace blips
