#pragma once

// Central finite-difference probes shared by the unit tests and the acceptance run.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "blips/denoiser.hpp"
#include "blips/training.hpp"
#include "blips/unrolled.hpp"
#include "support.hpp"

namespace testing {

struct Probe
{
  std::string what;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel() const { return std::abs(analytic - numeric) / std::max(std::abs(analytic), std::abs(numeric)); }
};

// Probes whose analytic and numeric values are both below this carry no signal.
inline constexpr double kProbeFloor = 1e-7;

inline double worst(const std::vector<Probe> &probes)
{
  double w = 0.0;
  for (const auto &p : probes) {
    w = std::max(w, p.rel());
  }
  return w;
}

using ParamLoss = std::function<double(const blips::DenoiserParams &)>;
using InputLoss = std::function<double(const blips::ComplexImage &)>;

// Coordinate probes on randomly chosen weights and biases, plus one random direction.
inline void probe_params(const ParamLoss &f, const blips::DenoiserParams &theta, const blips::DenoiserParams &grad,
                         std::size_t count, double step, blips::Rng &rng, std::vector<Probe> &out)
{
  const auto tensors = theta.tensors();
  std::size_t taken = 0;
  for (std::size_t attempt = 0; taken < count && attempt < 50 * count; ++attempt) {
    const std::size_t t = rng.below(tensors.size());
    const std::size_t i = rng.below(tensors[t].size());
    blips::DenoiserParams plus = theta;
    blips::DenoiserParams minus = theta;
    plus.tensors()[t][i] += step;
    minus.tensors()[t][i] -= step;
    Probe p{"theta[" + std::to_string(t) + "][" + std::to_string(i) + "]", grad.tensors()[t][i],
            (f(plus) - f(minus)) / (2.0 * step)};
    if (std::max(std::abs(p.analytic), std::abs(p.numeric)) < kProbeFloor) {
      continue;
    }
    out.push_back(p);
    ++taken;
  }
  blips::DenoiserParams dir = theta.zeros_like();
  for (auto t : dir.tensors()) {
    for (auto &v : t) {
      v = rng.uniform(-1.0, 1.0);
    }
  }
  const double len = std::sqrt(blips::dot(dir, dir));
  blips::DenoiserParams plus = theta;
  blips::DenoiserParams minus = theta;
  blips::add_scaled(plus, dir, step / len);
  blips::add_scaled(minus, dir, -step / len);
  out.push_back({"theta.direction", blips::dot(grad, dir) / len, (f(plus) - f(minus)) / (2.0 * step)});
}

// Real and imaginary perturbations of random pixels.
inline void probe_input(const InputLoss &f, const blips::ComplexImage &x, const blips::ComplexImage &grad,
                        std::size_t count, double step, blips::Rng &rng, std::vector<Probe> &out)
{
  std::size_t taken = 0;
  for (std::size_t attempt = 0; taken < count && attempt < 50 * count; ++attempt) {
    const std::size_t i = rng.below(x.size());
    const bool imag = (attempt % 2) == 1;
    const blips::cplx delta = imag ? blips::cplx(0.0, step) : blips::cplx(step, 0.0);
    blips::ComplexImage plus = x;
    blips::ComplexImage minus = x;
    plus[i] += delta;
    minus[i] -= delta;
    Probe p{std::string(imag ? "Im x[" : "Re x[") + std::to_string(i) + "]",
            imag ? grad[i].imag() : grad[i].real(), (f(plus) - f(minus)) / (2.0 * step)};
    if (std::max(std::abs(p.analytic), std::abs(p.numeric)) < kProbeFloor) {
      continue;
    }
    out.push_back(p);
    ++taken;
  }
}

inline blips::DenoiserParams random_params(std::size_t channels, std::uint64_t seed)
{
  auto params = blips::DenoiserParams::init(channels, seed);
  blips::Rng rng(seed + 1000);
  for (auto &layer : params.layers) {
    for (auto &b : layer.bias) {
      b = rng.uniform(-0.1, 0.1);
    }
  }
  return params;
}

// Re<u, D(theta, x)> on a random 8x8 input with C = 4.
inline std::vector<Probe> denoiser_probes(std::uint64_t seed, std::size_t per_kind, double step)
{
  blips::Rng rng(seed);
  const auto params = random_params(4, seed);
  const auto x = blips::random_image(8, 8, rng);
  const auto u = blips::random_image(8, 8, rng);
  const auto g = blips::denoiser_backward(params, x, u);
  std::vector<Probe> out;
  probe_params([&](const blips::DenoiserParams &p) { return blips::inner(u, blips::denoiser_forward(p, x)).real(); },
               params, g.params, per_kind, step, rng, out);
  probe_input([&](const blips::ComplexImage &v) { return blips::inner(u, blips::denoiser_forward(params, v)).real(); },
              x, g.input, per_kind, step, rng, out);
  return out;
}

// Training loss through an L = 2 unroll on 8x8 with C = 4, exact data-consistency solves.
inline std::vector<Probe> unrolled_probes(std::uint64_t seed, blips::Coupling coupling, std::size_t per_kind,
                                          double step)
{
  blips::Sample sample;
  sample.sys = random_system(8, 8, 2, 0.5, seed);
  blips::Rng rng(seed + 1);
  sample.target = blips::random_image(8, 8, rng);
  sample.y = blips::apply_forward(sample.sys, sample.target);
  blips::SupervisedConfig scfg;
  scfg.nu = 2.0;
  scfg.unrolls = 2;
  scfg.cg_iters = 500;
  scfg.cg_tol = 1e-14;
  const double beta = 0.01;
  const auto params = random_params(4, seed + 2);

  blips::StageInput in;
  in.sample = &sample;
  in.start = blips::zero_filled_recon(sample.sys, sample.y);
  in.anchor = in.start;
  const auto bg = blips::batch_gradient(params, {&in}, coupling, scfg, beta);

  auto loss = [&](const blips::DenoiserParams &p, const blips::ComplexImage &x0) {
    const auto xhat = blips::unroll_forward(p, x0, sample.sys, sample.y, scfg, coupling, &in.anchor);
    return blips::loss_cbeta(xhat, sample.target, beta);
  };
  std::vector<Probe> out;
  out.push_back({"mean_loss", bg.mean_loss, loss(params, in.start)});
  probe_params([&](const blips::DenoiserParams &p) { return loss(p, in.start); }, params, bg.grad, per_kind, step,
               rng, out);

  if (coupling == blips::Coupling::residual) {
    blips::UnrollTape tape;
    const auto xhat = blips::unroll_forward(params, in.start, sample.sys, sample.y, scfg, coupling, nullptr, &tape);
    const auto g = blips::unroll_backward(params, tape, sample.sys, scfg,
                                          blips::loss_cbeta_gradient(xhat, sample.target, beta), coupling);
    probe_input([&](const blips::ComplexImage &x0) { return loss(params, x0); }, in.start, g.input, per_kind, step,
                rng, out);
  }
  return out;
}

} // namespace testing
