#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "blips/patches.hpp"

namespace blips {

// r x U, unit-norm columns (atoms).
struct Dictionary
{
  Eigen::MatrixXcd atoms;

  std::size_t patch_length() const { return static_cast<std::size_t>(atoms.rows()); }
  std::size_t n_atoms() const { return static_cast<std::size_t>(atoms.cols()); }
};

struct CodeEntry
{
  std::uint32_t patch;
  cplx value;
};

// U x N code matrix Z stored row by row; row u holds the coefficients of atom u
// for every patch that uses it, sorted by patch index.
class SparseCodes
{
public:
  SparseCodes() = default;
  SparseCodes(std::size_t n_atoms, std::size_t n_patches) : n_patches_(n_patches), rows_(n_atoms) {}

  std::size_t n_atoms() const { return rows_.size(); }
  std::size_t n_patches() const { return n_patches_; }
  const std::vector<CodeEntry> &row(std::size_t u) const { return rows_[u]; }
  void set_row(std::size_t u, std::vector<CodeEntry> entries) { rows_[u] = std::move(entries); }
  std::size_t nnz() const;

  Eigen::MatrixXcd to_dense() const;
  static SparseCodes from_dense(const Eigen::MatrixXcd &dense);

  bool operator==(const SparseCodes &) const = default;

private:
  std::size_t n_patches_ = 0;
  std::vector<std::vector<CodeEntry>> rows_;
};

bool operator==(const CodeEntry &a, const CodeEntry &b);

enum class AtomUpdate
{
  learn, // SOUP-DIL: code step then atom step
  fixed, // code step only; the dictionary is never touched
};

// Separable overcomplete inverse DCT, columns normalized; atom 0 is constant.
Dictionary init_overcomplete_idct(std::size_t patch_length, std::size_t n_atoms);

// l0 proximal map: keeps b iff |b| >= lambda.
inline cplx hard_threshold(cplx b, double lambda) { return std::abs(b) >= lambda ? b : cplx{}; }

// D Z, r x N.
Eigen::MatrixXcd synthesize(const Dictionary &dict, const SparseCodes &codes);

// sum_j ||p_j - D e_j||^2 + lambda^2 ||e_j||_0
double dl_objective(const PatchMatrix &patches, const Dictionary &dict, const SparseCodes &codes, double lambda);

// Block coordinate descent state for a sweep. Keeps the full residual
// R = P - D Z current, so E_u = R + d_u z_u^H is never formed explicitly.
class SoupDilSweep
{
public:
  SoupDilSweep(const PatchMatrix &patches, Dictionary &dict, SparseCodes &codes, double lambda,
               AtomUpdate mode = AtomUpdate::learn);

  void update_atom(std::size_t u);
  void run();

private:
  const PatchMatrix &patches_;
  Dictionary &dict_;
  SparseCodes &codes_;
  double lambda_;
  AtomUpdate mode_;
  Eigen::MatrixXcd residual_;
  std::vector<cplx> old_row_;
};

// One full sweep over all atoms.
std::pair<Dictionary, SparseCodes> soup_dil_inner_iteration(const PatchMatrix &patches, Dictionary dict,
                                                            SparseCodes codes, double lambda,
                                                            AtomUpdate mode = AtomUpdate::learn);

} // namespace blips
