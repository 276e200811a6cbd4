#include "blips/dictionary.hpp"

#include <cmath>
#include <numbers>

#include "blips/errors.hpp"

namespace blips {

bool operator==(const CodeEntry &a, const CodeEntry &b) { return a.patch == b.patch && a.value == b.value; }

std::size_t SparseCodes::nnz() const
{
  std::size_t n = 0;
  for (const auto &r : rows_) {
    n += r.size();
  }
  return n;
}

Eigen::MatrixXcd SparseCodes::to_dense() const
{
  Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows_.size()),
                                                  static_cast<Eigen::Index>(n_patches_));
  for (std::size_t u = 0; u < rows_.size(); ++u) {
    for (const auto &e : rows_[u]) {
      dense(static_cast<Eigen::Index>(u), e.patch) = e.value;
    }
  }
  return dense;
}

SparseCodes SparseCodes::from_dense(const Eigen::MatrixXcd &dense)
{
  SparseCodes codes(static_cast<std::size_t>(dense.rows()), static_cast<std::size_t>(dense.cols()));
  for (Eigen::Index u = 0; u < dense.rows(); ++u) {
    std::vector<CodeEntry> row;
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(u, j) != cplx{}) {
        row.push_back({static_cast<std::uint32_t>(j), dense(u, j)});
      }
    }
    codes.set_row(static_cast<std::size_t>(u), std::move(row));
  }
  return codes;
}

Dictionary init_overcomplete_idct(std::size_t patch_length, std::size_t n_atoms)
{
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(patch_length))));
  const auto freqs = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n_atoms))));
  require(patch_length > 0 && side * side == patch_length, "init_overcomplete_idct: patch length must be a square");
  require(n_atoms > 0 && freqs * freqs == n_atoms, "init_overcomplete_idct: atom count must be a square");

  // 1D DCT-II synthesis vectors sampled at `side` points for `freqs` frequencies.
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(side), static_cast<Eigen::Index>(freqs));
  for (std::size_t k = 0; k < freqs; ++k) {
    for (std::size_t i = 0; i < side; ++i) {
      basis(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
        std::cos(std::numbers::pi * static_cast<double>((2 * i + 1) * k) / static_cast<double>(2 * freqs));
    }
  }
  Dictionary dict;
  dict.atoms.resize(static_cast<Eigen::Index>(patch_length), static_cast<Eigen::Index>(n_atoms));
  for (std::size_t a = 0; a < freqs; ++a) {
    for (std::size_t b = 0; b < freqs; ++b) {
      const auto u = static_cast<Eigen::Index>(a * freqs + b);
      for (std::size_t i1 = 0; i1 < side; ++i1) {
        for (std::size_t i2 = 0; i2 < side; ++i2) {
          dict.atoms(static_cast<Eigen::Index>(i1 * side + i2), u) =
            basis(static_cast<Eigen::Index>(i1), static_cast<Eigen::Index>(a)) *
            basis(static_cast<Eigen::Index>(i2), static_cast<Eigen::Index>(b));
        }
      }
      const double n = dict.atoms.col(u).norm();
      require(n > 0.0, "init_overcomplete_idct: degenerate atom");
      dict.atoms.col(u) /= n;
    }
  }
  return dict;
}

Eigen::MatrixXcd synthesize(const Dictionary &dict, const SparseCodes &codes)
{
  require(dict.n_atoms() == codes.n_atoms(), "synthesize: atom count mismatch");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dict.atoms.rows(), static_cast<Eigen::Index>(codes.n_patches()));
  for (std::size_t u = 0; u < codes.n_atoms(); ++u) {
    const auto atom = dict.atoms.col(static_cast<Eigen::Index>(u));
    for (const auto &e : codes.row(u)) {
      out.col(e.patch) += atom * e.value;
    }
  }
  return out;
}

double dl_objective(const PatchMatrix &patches, const Dictionary &dict, const SparseCodes &codes, double lambda)
{
  require(static_cast<std::size_t>(patches.cols()) == codes.n_patches() &&
            static_cast<std::size_t>(patches.rows()) == dict.patch_length(),
          "dl_objective: shape mismatch");
  const double fit = (patches - synthesize(dict, codes)).squaredNorm();
  return fit + lambda * lambda * static_cast<double>(codes.nnz());
}

SoupDilSweep::SoupDilSweep(const PatchMatrix &patches, Dictionary &dict, SparseCodes &codes, double lambda,
                           AtomUpdate mode)
  : patches_(patches), dict_(dict), codes_(codes), lambda_(lambda), mode_(mode)
{
  require(lambda > 0.0, "soup_dil: lambda must be positive");
  require(static_cast<std::size_t>(patches.rows()) == dict.patch_length(), "soup_dil: patch length mismatch");
  require(codes.n_atoms() == dict.n_atoms() && codes.n_patches() == static_cast<std::size_t>(patches.cols()),
          "soup_dil: code matrix shape mismatch");
  residual_ = patches_ - synthesize(dict_, codes_);
  old_row_.assign(codes.n_patches(), cplx{});
}

void SoupDilSweep::update_atom(std::size_t u)
{
  const auto n = static_cast<std::ptrdiff_t>(codes_.n_patches());
  const auto ui = static_cast<Eigen::Index>(u);
  const Eigen::Index r = patches_.rows();
  const Eigen::VectorXcd atom = dict_.atoms.col(ui);
  const std::vector<CodeEntry> previous = codes_.row(u);
  for (const auto &e : previous) {
    old_row_[e.patch] = e.value;
  }

  // b_j = d_u^H E_u(:, j) = d_u^H R(:, j) + z_u(j)
  const Eigen::RowVectorXcd b = atom.adjoint() * residual_ + Eigen::Map<const Eigen::RowVectorXcd>(old_row_.data(), n);

  // Squared magnitudes settle all but near-ties without a hypot call.
  const double lo = lambda_ * lambda_ * (1.0 - 1e-12);
  const double hi = lambda_ * lambda_ * (1.0 + 1e-12);
  std::vector<CodeEntry> row;
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const cplx bj = b(j);
    const double sq = std::norm(bj);
    if (sq < lo) {
      continue;
    }
    const cplx v = sq > hi ? bj : hard_threshold(bj, lambda_);
    if (v != cplx{}) {
      row.push_back({static_cast<std::uint32_t>(j), v});
    }
  }

  // Remove atom u's old contribution: R <- E_u.
  for (const auto &e : previous) {
    residual_.col(e.patch) += atom * e.value;
    old_row_[e.patch] = cplx{};
  }

  Eigen::VectorXcd next = atom;
  if (mode_ == AtomUpdate::learn) {
    // h = E_u conj(z_u)
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(r);
    for (const auto &e : row) {
      h += residual_.col(e.patch) * std::conj(e.value);
    }
    const double hn = h.norm();
    if (hn > 0.0) {
      next = h / hn;
    } else {
      next.setZero();
      next(0) = 1.0;
    }
    dict_.atoms.col(ui) = next;
  }

  for (const auto &e : row) {
    residual_.col(e.patch) -= next * e.value;
  }
  codes_.set_row(u, std::move(row));
}

void SoupDilSweep::run()
{
  for (std::size_t u = 0; u < dict_.n_atoms(); ++u) {
    update_atom(u);
  }
}

std::pair<Dictionary, SparseCodes> soup_dil_inner_iteration(const PatchMatrix &patches, Dictionary dict,
                                                            SparseCodes codes, double lambda, AtomUpdate mode)
{
  SoupDilSweep sweep(patches, dict, codes, lambda, mode);
  sweep.run();
  return {std::move(dict), std::move(codes)};
}

} // namespace blips
