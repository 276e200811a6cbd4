#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "blips/unrolled.hpp"

namespace blips {

struct TrainConfig
{
  double beta = 0.01;
  std::size_t epochs = 40;
  std::size_t stage1_epochs = 40; // P3 theta1 budget
  double learning_rate = 1e-4;    // decays linearly to 0 over the epochs
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 4;
  std::size_t channels = 16;
  std::size_t depth = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

// ||xtrue - xhat||_2^2 + beta ||xtrue - xhat||_1 (complex magnitudes)
double loss_cbeta(const ComplexImage &xhat, const ComplexImage &xtrue, double beta);
// d/dxhat of loss_cbeta; the l1 subgradient is taken as 0 where xhat = xtrue.
ComplexImage loss_cbeta_gradient(const ComplexImage &xhat, const ComplexImage &xtrue, double beta);

// lr * (1 - epoch / epochs)
double learning_rate_at(const TrainConfig &cfg, std::size_t epoch, std::size_t epochs);

class Adam
{
public:
  Adam(const DenoiserParams &like, double beta1, double beta2, double eps);

  void step(DenoiserParams &params, const DenoiserParams &grad, double lr);
  std::size_t steps() const { return steps_; }

private:
  double beta1_;
  double beta2_;
  double eps_;
  std::size_t steps_ = 0;
  DenoiserParams m_;
  DenoiserParams v_;
};

struct Sample
{
  MultiCoilSystem sys;
  KSpace y;
  ComplexImage target;
};

// Starting image of the trainable stage for one sample.
struct StageInput
{
  const Sample *sample = nullptr;
  ComplexImage start;
  ComplexImage anchor; // used with Coupling::anchored
};

struct StageResult
{
  DenoiserParams params;
  std::vector<double> epoch_loss; // mean sample loss per epoch
};

// Trains one parameter set shared by all unrolled iterations of a stage.
StageResult train_stage(DenoiserParams init, const std::vector<StageInput> &inputs, Coupling coupling,
                        const SupervisedConfig &scfg, const TrainConfig &tcfg, std::size_t epochs,
                        std::uint64_t shuffle_seed);

// Gradient of the mean batch loss; exposed for tests.
struct BatchGradient
{
  DenoiserParams grad;
  double mean_loss = 0.0;
};
BatchGradient batch_gradient(const DenoiserParams &params, const std::vector<const StageInput *> &batch,
                             Coupling coupling, const SupervisedConfig &scfg, double beta);

struct TrainResult
{
  PipelineParams params;
  std::vector<double> loss_history;        // final stage
  std::vector<double> stage1_loss_history; // P3 only
};

// Parameter-free blind stage outputs; index-aligned with the dataset.
using BlindProvider = std::function<ComplexImage(std::size_t index, const Sample &sample)>;

// P1/P2 train from the blind outputs (computed inline when `blind` is empty);
// P3 trains theta1 for stage1_epochs, freezes it and trains theta2 through
// the full supervised-blind-supervised composition.
TrainResult train(const PipelineSpec &spec, const std::vector<Sample> &dataset, const TrainConfig &tcfg,
                  const BlindProvider &blind = {});

} // namespace blips
