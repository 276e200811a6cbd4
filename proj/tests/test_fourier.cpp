#include <doctest.h>

#include <cmath>
#include <numbers>

#include "blips/errors.hpp"
#include "blips/fft.hpp"
#include "blips/metrics.hpp"
#include "blips/multicoil.hpp"
#include "support.hpp"

using namespace blips;
using testing::max_abs_diff;

namespace {

// Direct O(N^4) centered unitary DFT.
ComplexImage naive_dft(const ComplexImage &x, double sign)
{
  const auto h = static_cast<long>(x.height());
  const auto w = static_cast<long>(x.width());
  const long h0 = h / 2;
  const long w0 = w / 2;
  ComplexImage out(x.height(), x.width());
  for (long k1 = 0; k1 < h; ++k1) {
    for (long k2 = 0; k2 < w; ++k2) {
      cplx acc{};
      for (long n1 = 0; n1 < h; ++n1) {
        for (long n2 = 0; n2 < w; ++n2) {
          const double ph = sign * 2.0 * std::numbers::pi *
                            (static_cast<double>((k1 - h0) * (n1 - h0)) / static_cast<double>(h) +
                             static_cast<double>((k2 - w0) * (n2 - w0)) / static_cast<double>(w));
          acc += x(static_cast<std::size_t>(n1), static_cast<std::size_t>(n2)) * std::polar(1.0, ph);
        }
      }
      out(static_cast<std::size_t>(k1), static_cast<std::size_t>(k2)) = acc / std::sqrt(static_cast<double>(h * w));
    }
  }
  return out;
}

MultiCoilSystem unit_coil_system(std::size_t h, std::size_t w)
{
  ComplexImage ones(h, w);
  for (auto &v : ones.data()) {
    v = 1.0;
  }
  return MultiCoilSystem(CoilSet({ones}), SamplingMask::full(h, w));
}

} // namespace

TEST_SUITE("fourier")
{
  TEST_CASE("impulse at centre transforms to constant 1/8")
  {
    ComplexImage x(8, 8);
    x(4, 4) = 1.0;
    const auto k = fft2c(x);
    for (const auto &v : k.data()) {
      CHECK(std::abs(v - cplx(0.125, 0.0)) < 1e-15);
    }
    const auto back = ifft2c(k);
    CHECK(max_abs_diff(back, x) < 1e-15);
  }

  TEST_CASE("zero in, zero out")
  {
    const ComplexImage z(6, 10);
    CHECK(fft2c(z) == z);
    CHECK(ifft2c(z) == z);
  }

  TEST_CASE("matches the direct transform on even and odd grids")
  {
    Rng rng(3);
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{8, 8}, {6, 10}, {5, 7}, {9, 4}}) {
      const auto x = random_image(h, w, rng);
      CHECK(max_abs_diff(fft2c(x), naive_dft(x, -1.0)) < 1e-12);
      CHECK(max_abs_diff(ifft2c(x), naive_dft(x, 1.0)) < 1e-12);
    }
  }

  TEST_CASE("unitary: Parseval and exact inverse")
  {
    Rng rng(5);
    const auto x = random_image(32, 24, rng);
    const auto k = fft2c(x);
    CHECK(std::abs(norm2_squared(k) - norm2_squared(x)) < 1e-10 * norm2_squared(x));
    CHECK(max_abs_diff(ifft2c(k), x) < 1e-13);
    CHECK(max_abs_diff(fft2c(ifft2c(x)), x) < 1e-13);
  }

  TEST_CASE("empty grid is rejected")
  {
    CHECK_THROWS_AS(fft2c(ComplexImage()), InvalidArgument);
    CHECK_THROWS_AS(ifft2c(ComplexImage(0, 4)), InvalidArgument);
  }

  TEST_CASE("single unit coil with full mask is the plain transform")
  {
    Rng rng(7);
    const auto x = random_image(8, 6, rng);
    const auto sys = unit_coil_system(8, 6);
    const auto y = apply_forward(sys, x);
    REQUIRE(y.size() == 1);
    CHECK(max_abs_diff(y[0], fft2c(x)) < 1e-15);
    CHECK(max_abs_diff(apply_adjoint(sys, y), ifft2c(y[0])) < 1e-15);
  }

  TEST_CASE("forward on four coils is per-coil transform of V_c x")
  {
    Rng rng(11);
    const auto coils = testing::random_coils(8, 8, 4, rng);
    const MultiCoilSystem sys(coils, SamplingMask::full(8, 8));
    const auto x = random_image(8, 8, rng);
    const auto y = apply_forward(sys, x);
    REQUIRE(y.size() == 4);
    for (std::size_t c = 0; c < 4; ++c) {
      ComplexImage vx(8, 8);
      for (std::size_t i = 0; i < vx.size(); ++i) {
        vx[i] = coils[c][i] * x[i];
      }
      CHECK(max_abs_diff(y[c], fft2c(vx)) < 1e-14);
    }
  }

  TEST_CASE("adjoint of forward with full mask and normalized coils is the identity")
  {
    const auto sys = testing::random_system(16, 12, 8, 2.0, 13);
    Rng rng(17);
    const auto x = random_image(16, 12, rng);
    CHECK(max_abs_diff(apply_adjoint(sys, apply_forward(sys, x)), x) < 1e-12);
    CHECK(max_abs_diff(zero_filled_recon(sys, apply_forward(sys, x)), x) < 1e-12);
  }

  TEST_CASE("dot test <A x, y> = <x, A^H y>")
  {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto sys = testing::random_system(12, 10, 3, 0.4, 100 + s);
      Rng rng(200 + s);
      const auto x = random_image(12, 10, rng);
      KSpace y;
      for (std::size_t c = 0; c < 3; ++c) {
        y.push_back(random_image(12, 10, rng));
      }
      const cplx lhs = inner(apply_forward(sys, x), y);
      const cplx rhs = inner(x, apply_adjoint(sys, y));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
    }
  }

  TEST_CASE("forward output is zero off the mask and masking is idempotent")
  {
    const auto sys = testing::random_system(10, 10, 2, 0.3, 21);
    Rng rng(22);
    const auto y = apply_forward(sys, random_image(10, 10, rng));
    for (const auto &yc : y) {
      for (std::size_t i = 0; i < yc.size(); ++i) {
        if (!sys.mask()[i]) {
          CHECK(yc[i] == cplx{});
        }
      }
      auto again = yc;
      sys.mask().apply(again);
      CHECK(again == yc);
    }
  }

  TEST_CASE("normal operator is self-adjoint, PSD and matches A^H A")
  {
    const auto sys = testing::random_system(12, 12, 4, 0.35, 31);
    Rng rng(32);
    const auto x = random_image(12, 12, rng);
    const auto z = random_image(12, 12, rng);
    const auto nx = apply_normal(sys, x);
    CHECK(max_abs_diff(nx, apply_adjoint(sys, apply_forward(sys, x))) < 1e-12);
    CHECK(std::abs(inner(z, nx) - inner(apply_normal(sys, z), x)) < 1e-10);
    CHECK(inner(x, nx).real() >= 0.0);
    CHECK(std::abs(inner(x, nx).imag()) < 1e-10);
  }

  TEST_CASE("zero measurements give a zero image")
  {
    const auto sys = testing::random_system(8, 8, 2, 0.5, 41);
    const KSpace y(2, ComplexImage(8, 8));
    CHECK(zero_filled_recon(sys, y) == ComplexImage(8, 8));
  }

  TEST_CASE("undersampling lowers zero-filled PSNR on the phantom")
  {
    const auto x = make_phantom(PhantomSpec::make_default(64, 64, 1));
    const auto coils = make_coils(64, 64, 4, 2);
    const MultiCoilSystem full(coils, SamplingMask::full(64, 64));
    MaskSpec ms;
    ms.height = 64;
    ms.width = 64;
    ms.acceleration = 5.0;
    ms.acs_lines = 5;
    ms.seed = 1;
    const MultiCoilSystem under(coils, mask_1d_variable_density(ms));
    const double p_full = psnr(zero_filled_recon(full, apply_forward(full, x)), x);
    const double p_under = psnr(zero_filled_recon(under, apply_forward(under, x)), x);
    CHECK(p_full > 200.0);
    CHECK(p_under < p_full);
    CHECK(p_under < 40.0);
  }

  TEST_CASE("shape and coil-count mismatches are rejected")
  {
    const auto sys = testing::random_system(8, 8, 2, 0.5, 51);
    CHECK_THROWS_AS(apply_forward(sys, ComplexImage(8, 6)), InvalidArgument);
    CHECK_THROWS_AS(apply_adjoint(sys, KSpace(3, ComplexImage(8, 8))), InvalidArgument);
    CHECK_THROWS_AS(apply_adjoint(sys, KSpace(2, ComplexImage(4, 8))), InvalidArgument);
    CHECK_THROWS_AS(zero_filled_recon(sys, KSpace(1, ComplexImage(8, 8))), InvalidArgument);
    Rng rng(1);
    CHECK_THROWS_AS(MultiCoilSystem(testing::random_coils(8, 8, 2, rng), SamplingMask::full(8, 6)),
                    InvalidArgument);
  }

  TEST_CASE("coil maps: reject unnormalized, normalize on request")
  {
    ComplexImage half(4, 4);
    for (auto &v : half.data()) {
      v = 0.5;
    }
    CHECK_THROWS_AS(CoilSet({half}), InvalidArgument);
    const CoilSet fixed({half}, SosPolicy::normalize);
    CHECK(fixed.sos_deviation() < 1e-12);
    ComplexImage near(4, 4);
    for (auto &v : near.data()) {
      v = std::sqrt(1.0 + 5e-4);
    }
    CHECK_NOTHROW(CoilSet({near}));
    CHECK_THROWS_AS(CoilSet({ComplexImage(4, 4)}, SosPolicy::normalize), InvalidArgument);
    CHECK_THROWS_AS(SamplingMask(2, 2, {0, 0, 0, 0}), InvalidArgument);
    CHECK_THROWS_AS(SamplingMask(2, 2, {1, 0, 0}), InvalidArgument);
  }
}
