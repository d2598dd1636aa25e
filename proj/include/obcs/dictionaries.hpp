#pragma once

#include "obcs/core.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace obcs {

enum class DictionaryKind { identity, random_tight, haar2d, custom };

std::string to_string(DictionaryKind kind);
DictionaryKind parse_dictionary_kind(const std::string& tag);

/// Explicit dense dictionary D in R^{n x N}; the adjoint D^T maps signals to
/// analysis coefficients. All built-in kinds are tight frames (D D^T = I_n).
struct Dictionary {
  Matrix D;
  DictionaryKind kind = DictionaryKind::custom;

  Index n() const { return D.rows(); }
  Index N() const { return D.cols(); }

  Vector analyze(const Vector& f) const { return analysis_coefficients(f, D); }
  Vector synthesize(const Vector& x) const { return D * x; }

  /// max |(D D^T - I)_{ij}|
  double tightness_defect() const;
  bool is_tight(double tol = 1e-10) const { return tightness_defect() <= tol; }
  /// Square with orthonormal rows: analysis is an isometry with exact inverse.
  bool is_orthonormal_basis(double tol = 1e-10) const { return n() == N() && is_tight(tol); }
};

Dictionary identity_dictionary(Index n);

/// Draws an n x N matrix with i.i.d. unit-norm columns uniform on S^{n-1},
/// then orthonormalizes its rows (QR of the transpose), giving a tight frame
/// with the same row space. Redraws on a degenerate (rank < n) sample, at
/// most 10 times.
Dictionary random_tight_dictionary(Index n, Index N, const RngStream& rng);

/// Orthonormal 2-D Haar basis on side x side images (side a power of two),
/// as an explicit (side^2) x (side^2) matrix. Images are vectorized row-major;
/// analyze() is the full 2-D Haar transform.
Dictionary haar_dictionary_2d(Index side);

/// Exactly dictionary-sparse signal generator: support S plus the stream
/// feeding the null-space coefficients.
struct SparseSignalSpec {
  std::vector<Index> support;  // distinct indices in [0, N)
  RngStream coefficients;
};

/// f = B c where B is an orthonormal basis of null(D_restricted^T), the
/// subspace orthogonal to every off-support column, and c is standard normal.
/// The analysis vector of f is exactly supported on S (up to roundoff).
/// Throws when that subspace is trivial ("support infeasible").
Vector exact_sparse_signal(const Dictionary& dict, const SparseSignalSpec& spec);

/// Smallest support that leaves `dof` null-space dimensions for a dictionary
/// in general position: the complement is a uniformly random subset of size
/// n - dof, so |S| = N - n + dof (= dof for orthonormal bases).
std::vector<Index> analysis_sparse_support(Index n, Index N, int dof, const RngStream& rng);

/// File I/O in the repo-wide matrix text format with a "kind: <tag>" comment.
void write_dictionary_file(const std::filesystem::path& path, const Dictionary& dict);
Dictionary read_dictionary_file(const std::filesystem::path& path);

}  // namespace obcs
