// OpenMP kernels against their serial references.
// Run with OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include "blips/conv.hpp"
#include "blips/masks.hpp"
#include "blips/multicoil.hpp"
#include "blips/patches.hpp"
#include "blips/phantom.hpp"
#include "blips/random.hpp"
#include "blips/serial.hpp"

using namespace blips;
namespace serial = blips::kernels::serial;

namespace {

kernels::FeatureMap random_map(std::size_t c, std::size_t side, std::uint64_t seed)
{
  Rng rng(seed);
  kernels::FeatureMap m(c, side, side);
  for (auto &v : m.data) {
    v = rng.normal();
  }
  return m;
}

kernels::ConvLayer random_layer(std::size_t in, std::size_t out, std::uint64_t seed)
{
  Rng rng(seed);
  kernels::ConvLayer l(in, out);
  for (auto &v : l.weight) {
    v = 0.1 * rng.normal();
  }
  return l;
}

MultiCoilSystem system_of(std::size_t side)
{
  MaskSpec ms;
  ms.height = side;
  ms.width = side;
  ms.acceleration = 5.0;
  ms.acs_lines = 5;
  ms.seed = 1;
  return {make_coils(side, side, 4, 2), make_mask(ms)};
}

void BM_extract_patches(benchmark::State &state)
{
  const auto side = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto x = random_image(side, side, rng);
  const PatchConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_patches(x, cfg));
  }
}

void BM_extract_patches_serial(benchmark::State &state)
{
  const auto side = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto x = random_image(side, side, rng);
  const PatchConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::extract_patches(x, cfg));
  }
}

void BM_aggregate_patches(benchmark::State &state)
{
  const auto side = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const PatchConfig cfg;
  const auto p = extract_patches(random_image(side, side, rng), cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(aggregate_patches(p, cfg, side, side));
  }
}

void BM_aggregate_patches_serial(benchmark::State &state)
{
  const auto side = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const PatchConfig cfg;
  const auto p = extract_patches(random_image(side, side, rng), cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::aggregate_patches(p, cfg, side, side));
  }
}

void BM_conv_forward(benchmark::State &state)
{
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto in = random_map(16, side, 3);
  const auto layer = random_layer(16, 16, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::conv3x3_forward(layer, in));
  }
}

void BM_conv_forward_serial(benchmark::State &state)
{
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto in = random_map(16, side, 3);
  const auto layer = random_layer(16, 16, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::conv3x3_forward(layer, in));
  }
}

void BM_conv_backward(benchmark::State &state)
{
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto in = random_map(16, side, 3);
  const auto up = random_map(16, side, 5);
  const auto layer = random_layer(16, 16, 4);
  for (auto _ : state) {
    kernels::ConvLayer g(16, 16);
    benchmark::DoNotOptimize(kernels::conv3x3_backward_input(layer, up));
    kernels::conv3x3_backward_params(in, up, g);
    benchmark::DoNotOptimize(g.weight.data());
  }
}

void BM_conv_backward_serial(benchmark::State &state)
{
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto in = random_map(16, side, 3);
  const auto up = random_map(16, side, 5);
  const auto layer = random_layer(16, 16, 4);
  for (auto _ : state) {
    kernels::ConvLayer g(16, 16);
    benchmark::DoNotOptimize(serial::conv3x3_backward_input(layer, up));
    serial::conv3x3_backward_params(in, up, g);
    benchmark::DoNotOptimize(g.weight.data());
  }
}

void BM_apply_normal(benchmark::State &state)
{
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto sys = system_of(side);
  Rng rng(6);
  const auto x = random_image(side, side, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_normal(sys, x));
  }
}

void BM_apply_normal_serial(benchmark::State &state)
{
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto sys = system_of(side);
  Rng rng(6);
  const auto x = random_image(side, side, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::apply_normal(sys, x));
  }
}

} // namespace

BENCHMARK(BM_extract_patches)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_extract_patches_serial)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_aggregate_patches)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_aggregate_patches_serial)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_conv_forward)->Arg(64)->Arg(128);
BENCHMARK(BM_conv_forward_serial)->Arg(64)->Arg(128);
BENCHMARK(BM_conv_backward)->Arg(64)->Arg(128);
BENCHMARK(BM_conv_backward_serial)->Arg(64)->Arg(128);
BENCHMARK(BM_apply_normal)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_apply_normal_serial)->Arg(64)->Arg(128)->Arg(256);

BENCHMARK_MAIN();
