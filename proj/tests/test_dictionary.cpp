#include <doctest.h>

#include <cmath>
#include <numbers>

#include "blips/dictionary.hpp"
#include "blips/errors.hpp"
#include "blips/patches.hpp"
#include "support.hpp"

using namespace blips;
using testing::max_abs_diff;

namespace {

double naive_objective(const PatchMatrix &p, const Dictionary &d, const SparseCodes &z, double lambda)
{
  const Eigen::MatrixXcd zd = z.to_dense();
  double acc = 0.0;
  std::size_t nnz = 0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      cplx s{};
      for (Eigen::Index u = 0; u < d.atoms.cols(); ++u) {
        s += d.atoms(i, u) * zd(u, j);
      }
      acc += std::norm(p(i, j) - s);
    }
    for (Eigen::Index u = 0; u < zd.rows(); ++u) {
      nnz += zd(u, j) != cplx{} ? 1 : 0;
    }
  }
  return acc + lambda * lambda * static_cast<double>(nnz);
}

PatchMatrix random_patches(Eigen::Index r, Eigen::Index n, std::uint64_t seed)
{
  Rng rng(seed);
  PatchMatrix p(r, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) {
      p(i, j) = rng.complex_normal();
    }
  }
  return p;
}

} // namespace

TEST_SUITE("dictionary")
{
  TEST_CASE("constant image gives constant patches")
  {
    ComplexImage x(10, 9);
    for (auto &v : x.data()) {
      v = cplx(0.3, -0.7);
    }
    const auto p = extract_patches(x, PatchConfig{6, 1});
    CHECK(p.rows() == 36);
    CHECK(p.cols() == 90);
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      for (Eigen::Index i = 0; i < p.rows(); ++i) {
        CHECK(p(i, j) == cplx(0.3, -0.7));
      }
    }
  }

  TEST_CASE("patch layout: column j anchored at pixel j with wrap")
  {
    Rng rng(1);
    const auto x = random_image(7, 5, rng);
    const auto p = extract_patches(x, PatchConfig{3, 1});
    for (std::size_t r = 0; r < 7; ++r) {
      for (std::size_t c = 0; c < 5; ++c) {
        for (std::size_t dr = 0; dr < 3; ++dr) {
          for (std::size_t dc = 0; dc < 3; ++dc) {
            CHECK(p(static_cast<Eigen::Index>(dr * 3 + dc), static_cast<Eigen::Index>(r * 5 + c)) ==
                  x((r + dr) % 7, (c + dc) % 5));
          }
        }
      }
    }
  }

  TEST_CASE("aggregate of extract is r times the identity")
  {
    Rng rng(2);
    const auto x = random_image(12, 16, rng);
    const PatchConfig cfg{6, 1};
    const auto back = aggregate_patches(extract_patches(x, cfg), cfg, 12, 16);
    CHECK(max_abs_diff(back, 36.0 * x) < 1e-12);
  }

  TEST_CASE("extract and aggregate are adjoint")
  {
    Rng rng(3);
    const PatchConfig cfg{4, 1};
    const auto x = random_image(9, 11, rng);
    const auto q = random_patches(16, 99, 4);
    const auto px = extract_patches(x, cfg);
    const cplx lhs = (px.adjoint() * q).trace();
    const cplx rhs = inner(x, aggregate_patches(q, cfg, 9, 11));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
  }

  TEST_CASE("single patch of ones at anchor 0 lands on the 2x2 corner")
  {
    const PatchConfig cfg{2, 1};
    PatchMatrix p = PatchMatrix::Zero(4, 16);
    p.col(0).setOnes();
    const auto img = aggregate_patches(p, cfg, 4, 4);
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t c = 0; c < 4; ++c) {
        CHECK(img(r, c) == cplx((r < 2 && c < 2) ? 1.0 : 0.0));
      }
    }
    CHECK(aggregate_patches(PatchMatrix::Zero(4, 16), cfg, 4, 4) == ComplexImage(4, 4));
  }

  TEST_CASE("patch errors")
  {
    CHECK_THROWS_AS(extract_patches(ComplexImage(5, 8), PatchConfig{6, 1}), InvalidArgument);
    CHECK_THROWS_AS(extract_patches(ComplexImage(8, 8), PatchConfig{2, 2}), InvalidArgument);
    CHECK_THROWS_AS(aggregate_patches(PatchMatrix::Zero(4, 15), PatchConfig{2, 1}, 4, 4), InvalidArgument);
    CHECK_THROWS_AS(aggregate_patches(PatchMatrix::Zero(9, 16), PatchConfig{2, 1}, 4, 4), InvalidArgument);
  }

  TEST_CASE("overcomplete IDCT 36x144")
  {
    const auto d = init_overcomplete_idct(36, 144);
    CHECK(d.atoms.rows() == 36);
    CHECK(d.atoms.cols() == 144);
    for (Eigen::Index u = 0; u < 144; ++u) {
      CHECK(std::abs(d.atoms.col(u).norm() - 1.0) < 1e-12);
    }
    for (Eigen::Index i = 0; i < 36; ++i) {
      CHECK(std::abs(d.atoms(i, 0) - cplx(1.0 / 6.0)) < 1e-15);
    }
  }

  TEST_CASE("IDCT with r = U = 4 is the orthonormal 2D DCT basis")
  {
    const auto d = init_overcomplete_idct(4, 4);
    const Eigen::MatrixXcd g = d.atoms.adjoint() * d.atoms;
    CHECK((g - Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-10);
    // 2-point DCT-II basis: [1, 1]/sqrt2 and [1, -1]/sqrt2
    const double h = 0.5;
    const double expect[4][4] = {{h, h, h, h}, {h, -h, h, -h}, {h, h, -h, -h}, {h, -h, -h, h}};
    for (int u = 0; u < 4; ++u) {
      for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(d.atoms(i, u) - cplx(expect[u][i])) < 1e-12);
      }
    }
  }

  TEST_CASE("IDCT rejects non-square sizes")
  {
    CHECK_THROWS_AS(init_overcomplete_idct(35, 144), InvalidArgument);
    CHECK_THROWS_AS(init_overcomplete_idct(36, 143), InvalidArgument);
  }

  TEST_CASE("scalar hard-threshold oracle")
  {
    const double lambda = 0.2;
    for (double mag : {0.15, 0.25}) {
      const cplx b = std::polar(mag, 0.7);
      PatchMatrix p(1, 1);
      p(0, 0) = b;
      Dictionary d;
      d.atoms = Eigen::MatrixXcd::Ones(1, 1);
      auto [d2, z2] = soup_dil_inner_iteration(p, d, SparseCodes(1, 1), lambda);
      const cplx expect = mag >= lambda ? b : cplx{};
      const auto dense = z2.to_dense();
      CHECK(std::abs(dense(0, 0) - expect) < 1e-15);
      CHECK(std::abs(d2.atoms(0, 0) - cplx(1.0)) < 1e-15);
    }
    CHECK(hard_threshold(cplx(0.2, 0.0), 0.2) == cplx(0.2, 0.0));
    CHECK(hard_threshold(cplx(0.0, -0.19999), 0.2) == cplx{});
  }

  TEST_CASE("atom with no codes resets to e1")
  {
    const auto p = random_patches(9, 20, 5);
    auto d = init_overcomplete_idct(9, 16);
    SparseCodes z(16, 20);
    const PatchMatrix small = p * 1e-3;
    SoupDilSweep sweep(small, d, z, 10.0);
    sweep.update_atom(3);
    CHECK(z.row(3).empty());
    Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(9);
    e1(0) = 1.0;
    CHECK((d.atoms.col(3) - e1).norm() == 0.0);
  }

  TEST_CASE("objective closed forms")
  {
    const auto p = random_patches(4, 6, 6);
    const auto d = init_overcomplete_idct(4, 4);
    CHECK(std::abs(dl_objective(p, d, SparseCodes(4, 6), 0.3) - p.squaredNorm()) < 1e-12);
    // exact representation: D orthonormal so Z = D^H P
    const auto z = SparseCodes::from_dense(d.atoms.adjoint() * p);
    const double s = static_cast<double>(z.nnz());
    CHECK(std::abs(dl_objective(p, d, z, 0.3) - 0.09 * s) < 1e-10);
    CHECK(std::abs(dl_objective(p, d, z, 0.3) - naive_objective(p, d, z, 0.3)) < 1e-10);
  }

  TEST_CASE("sweep: per-atom monotone, unit atoms, threshold law, agrees with direct formulas")
  {
    Rng rng(7);
    const auto x = random_image(16, 16, rng);
    const PatchConfig cfg{4, 1};
    const auto p = extract_patches(x, cfg);
    const double lambda = 0.6;
    auto d = init_overcomplete_idct(16, 36);
    SparseCodes z(36, 256);
    for (int sweep_no = 0; sweep_no < 3; ++sweep_no) {
      SoupDilSweep sweep(p, d, z, lambda);
      double prev = dl_objective(p, d, z, lambda);
      for (std::size_t u = 0; u < 36; ++u) {
        // direct oracle for atom u
        const Eigen::MatrixXcd e = p - synthesize(d, z) + d.atoms.col(static_cast<Eigen::Index>(u)) *
                                                            z.to_dense().row(static_cast<Eigen::Index>(u));
        const Eigen::RowVectorXcd b = d.atoms.col(static_cast<Eigen::Index>(u)).adjoint() * e;
        sweep.update_atom(u);
        const Eigen::RowVectorXcd zu = z.to_dense().row(static_cast<Eigen::Index>(u));
        for (Eigen::Index j = 0; j < 256; ++j) {
          CHECK(std::abs(zu(j) - hard_threshold(b(j), lambda)) < 1e-12);
        }
        for (const auto &entry : z.row(u)) {
          CHECK(std::abs(entry.value) >= lambda);
        }
        CHECK(std::abs(d.atoms.col(static_cast<Eigen::Index>(u)).norm() - 1.0) < 1e-10);
        const double now = dl_objective(p, d, z, lambda);
        CHECK(now <= prev * (1.0 + 1e-12));
        prev = now;
      }
    }
  }

  TEST_CASE("fixed mode never touches the dictionary")
  {
    const auto p = random_patches(16, 64, 8);
    const auto d0 = init_overcomplete_idct(16, 64);
    auto [d1, z1] = soup_dil_inner_iteration(p, d0, SparseCodes(64, 64), 0.5, AtomUpdate::fixed);
    CHECK(d1.atoms == d0.atoms);
    CHECK(z1.nnz() > 0);
  }

  TEST_CASE("sparse code dense round trip")
  {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 5);
    m(0, 1) = cplx(1, 2);
    m(2, 4) = cplx(-3, 0);
    const auto z = SparseCodes::from_dense(m);
    CHECK(z.nnz() == 2);
    CHECK(z.to_dense() == m);
    CHECK(z.row(2).front().patch == 4);
  }

  TEST_CASE("sweep rejects bad arguments")
  {
    const auto p = random_patches(4, 3, 9);
    auto d = init_overcomplete_idct(4, 4);
    SparseCodes z(4, 3);
    CHECK_THROWS_AS(SoupDilSweep(p, d, z, 0.0), InvalidArgument);
    SparseCodes wrong(4, 2);
    CHECK_THROWS_AS(SoupDilSweep(p, d, wrong, 0.2), InvalidArgument);
  }
}
