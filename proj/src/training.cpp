#include "blips/training.hpp"

#include <cmath>

#include "blips/errors.hpp"
#include "blips/parallel.hpp"
#include "blips/random.hpp"

namespace blips {

void TrainConfig::validate() const
{
  require(beta >= 0.0, "TrainConfig: beta must be >= 0");
  require(learning_rate >= 0.0, "TrainConfig: learning rate must be >= 0");
  require(batch_size >= 1, "TrainConfig: batch size must be >= 1");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0,
          "TrainConfig: Adam betas must be in [0, 1)");
}

double loss_cbeta(const ComplexImage &xhat, const ComplexImage &xtrue, double beta)
{
  require_same_shape(xhat, xtrue, "loss_cbeta");
  double l2 = 0.0;
  double l1 = 0.0;
  for (std::size_t i = 0; i < xhat.size(); ++i) {
    const cplx e = xtrue[i] - xhat[i];
    l2 += std::norm(e);
    l1 += std::abs(e);
  }
  return l2 + beta * l1;
}

ComplexImage loss_cbeta_gradient(const ComplexImage &xhat, const ComplexImage &xtrue, double beta)
{
  require_same_shape(xhat, xtrue, "loss_cbeta_gradient");
  ComplexImage g(xhat.height(), xhat.width());
  for (std::size_t i = 0; i < xhat.size(); ++i) {
    const cplx d = xhat[i] - xtrue[i];
    const double m = std::abs(d);
    g[i] = 2.0 * d + (m > 0.0 ? beta * d / m : cplx{});
  }
  return g;
}

double learning_rate_at(const TrainConfig &cfg, std::size_t epoch, std::size_t epochs)
{
  if (epochs == 0) {
    return 0.0;
  }
  return cfg.learning_rate * (1.0 - static_cast<double>(epoch) / static_cast<double>(epochs));
}

Adam::Adam(const DenoiserParams &like, double beta1, double beta2, double eps)
  : beta1_(beta1), beta2_(beta2), eps_(eps), m_(like.zeros_like()), v_(like.zeros_like())
{
}

void Adam::step(DenoiserParams &params, const DenoiserParams &grad, double lr)
{
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  auto p = params.tensors();
  const auto g = grad.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t i = 0; i < p[t].size(); ++i) {
      m[t][i] = beta1_ * m[t][i] + (1.0 - beta1_) * g[t][i];
      v[t][i] = beta2_ * v[t][i] + (1.0 - beta2_) * g[t][i] * g[t][i];
      const double m_hat = m[t][i] / c1;
      const double v_hat = v[t][i] / c2;
      p[t][i] -= lr * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

BatchGradient batch_gradient(const DenoiserParams &params, const std::vector<const StageInput *> &batch,
                             Coupling coupling, const SupervisedConfig &scfg, double beta)
{
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
  std::vector<DenoiserParams> grads(batch.size());
  std::vector<double> losses(batch.size());
  LoopErrors errors;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < n; ++b) {
    const auto i = static_cast<std::size_t>(b);
    errors.capture(i, [&] {
      const StageInput &in = *batch[i];
      UnrollTape tape;
      const ComplexImage xhat =
        unroll_forward(params, in.start, in.sample->sys, in.sample->y, scfg, coupling, &in.anchor, &tape);
      losses[i] = loss_cbeta(xhat, in.sample->target, beta);
      const ComplexImage upstream = loss_cbeta_gradient(xhat, in.sample->target, beta);
      grads[i] = unroll_backward(params, tape, in.sample->sys, scfg, upstream, coupling).params;
    });
  }
  errors.rethrow();
  BatchGradient out{params.zeros_like(), 0.0};
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    add_scaled(out.grad, grads[b], inv);
    out.mean_loss += losses[b] * inv;
  }
  return out;
}

StageResult train_stage(DenoiserParams init, const std::vector<StageInput> &inputs, Coupling coupling,
                        const SupervisedConfig &scfg, const TrainConfig &tcfg, std::size_t epochs,
                        std::uint64_t shuffle_seed)
{
  tcfg.validate();
  require(!inputs.empty(), "train_stage: empty dataset");
  StageResult result{std::move(init), {}};
  Adam adam(result.params, tcfg.adam_beta1, tcfg.adam_beta2, tcfg.adam_eps);
  Rng rng(shuffle_seed);
  std::vector<std::size_t> order(inputs.size());
  for (std::size_t e = 0; e < epochs; ++e) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      order[i] = i;
    }
    rng.shuffle(order.begin(), order.end());
    const double lr = learning_rate_at(tcfg, e, epochs);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
      std::vector<const StageInput *> batch;
      for (std::size_t k = start; k < std::min(order.size(), start + tcfg.batch_size); ++k) {
        batch.push_back(&inputs[order[k]]);
      }
      const BatchGradient bg = batch_gradient(result.params, batch, coupling, scfg, tcfg.beta);
      if (!std::isfinite(bg.mean_loss)) {
        throw NumericFailure("training loss became non-finite at epoch " + std::to_string(e));
      }
      epoch_loss += bg.mean_loss * static_cast<double>(batch.size());
      adam.step(result.params, bg.grad, lr);
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(inputs.size()));
  }
  return result;
}

TrainResult train(const PipelineSpec &spec, const std::vector<Sample> &dataset, const TrainConfig &tcfg,
                  const BlindProvider &blind)
{
  spec.validate();
  tcfg.validate();
  require(!dataset.empty(), "train: empty dataset");
  TrainResult result;
  std::vector<StageInput> inputs(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    inputs[i].sample = &dataset[i];
  }
  const DenoiserParams init = DenoiserParams::init(tcfg.channels, tcfg.seed, tcfg.depth);

  auto blind_output = [&](std::size_t i) {
    return blind ? blind(i, dataset[i]) : blind_recon(dataset[i].sys, dataset[i].y, spec.blind, spec.patch);
  };

  switch (spec.kind) {
  case PipelineKind::supervised:
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      inputs[i].start = zero_filled_recon(dataset[i].sys, dataset[i].y);
    }
    break;
  case PipelineKind::p1:
  case PipelineKind::p2:
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      inputs[i].start = blind_output(i);
      inputs[i].anchor = inputs[i].start;
    }
    break;
  case PipelineKind::p3: {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      inputs[i].start = zero_filled_recon(dataset[i].sys, dataset[i].y);
    }
    StageResult stage1 =
      train_stage(init, inputs, Coupling::residual, spec.supervised, tcfg, tcfg.stage1_epochs, tcfg.seed);
    result.stage1_loss_history = std::move(stage1.epoch_loss);
    result.params.theta = std::move(stage1.params);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const ComplexImage first =
        unroll_forward(result.params.theta, inputs[i].start, dataset[i].sys, dataset[i].y, spec.supervised);
      inputs[i].start = blind_iterations(dataset[i].sys, dataset[i].y, first, spec.blind, spec.patch,
                                         AtomUpdate::learn);
    }
    const DenoiserParams init2 = DenoiserParams::init(tcfg.channels, tcfg.seed + 1, tcfg.depth);
    StageResult stage2 =
      train_stage(init2, inputs, Coupling::residual, spec.supervised2, tcfg, tcfg.epochs, tcfg.seed + 1);
    result.params.theta2 = std::move(stage2.params);
    result.loss_history = std::move(stage2.epoch_loss);
    return result;
  }
  }

  const Coupling coupling = spec.kind == PipelineKind::p2 ? Coupling::anchored : Coupling::residual;
  StageResult stage = train_stage(init, inputs, coupling, spec.supervised, tcfg, tcfg.epochs, tcfg.seed);
  result.params.theta = std::move(stage.params);
  result.loss_history = std::move(stage.epoch_loss);
  return result;
}

} // namespace blips
