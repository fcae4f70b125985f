#pragma once

// Dense symmetric linear algebra used by every decomposition stage:
// eigendecomposition with a fixed sign convention, numerical rank, range
// bases, projectors, isometric symmetric vectorization and rank-revealing
// column selection. All rank decisions go through Tolerances.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "bincomp/errors.hpp"

namespace bincomp {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Tolerances {
  double rank_rel_tol = 1e-8;
  double psd_tol = 1e-8;
  double round_tol = 1e-4;

  /// Throws std::invalid_argument unless every field lies in (0, 1).
  void validate() const;
};

/// Symmetric n x n matrix. Construction symmetrizes (X + X^t) / 2 after
/// checking that the asymmetry is within `asym_tol` relative to max |X_ij|.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& x, double asym_tol = 1e-6);

  static SymMatrix zero(Index n);
  static SymMatrix identity(Index n);
  /// a a^t
  static SymMatrix outer(const Vector& a);

  Index dim() const noexcept { return data_.rows(); }
  const Matrix& mat() const noexcept { return data_; }
  double operator()(Index i, Index j) const { return data_(i, j); }

  bool is_finite() const { return data_.allFinite(); }

 private:
  Matrix data_;
};

struct EigDecomposition {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // columns, orthonormal
};

struct Spectrum {
  Vector values;   // ascending
  Matrix vectors;  // empty unless requested
};

/// Eigen's SelfAdjointEigenSolver, falling back to a Jacobi SVD of
/// X + (||X||_F + 1) I on the rare inputs where its QR iteration does not
/// converge (seen on some exact projectors). Throws NonFinite.
Spectrum eigh(const Matrix& x, bool with_vectors = true);

/// Eigendecomposition sorted by descending eigenvalue. Each eigenvector is
/// oriented so that its entry of largest magnitude is nonnegative (first such
/// index on ties). Throws Error(NonFinite).
EigDecomposition sym_eig(const SymMatrix& x);

/// Count of eigenvalues with |lambda| > rank_rel_tol * max |lambda|.
Index numerical_rank(const SymMatrix& x, const Tolerances& tol = {});

/// Orthonormal basis (n x r) of the range of a PSD matrix: the eigenvectors of
/// the r = numerical_rank largest eigenvalues. Throws NotPsd / NonFinite.
Matrix orth_basis(const SymMatrix& x, const Tolerances& tol = {});

/// P = Q Q^t. Throws NotOrthonormal unless ||Q^t Q - I||_max <= 1e-8.
SymMatrix orth_projector(const Matrix& q);

/// Isometric vectorization of the upper triangle in column-major order
/// (0,0),(0,1),(1,1),(0,2),... with off-diagonal entries scaled by sqrt(2).
Vector svec(const SymMatrix& x);
SymMatrix smat(const Vector& v);

/// Greedy column-pivoted QR selection of a maximal linearly independent subset
/// of `vectors` (ascending indices). Throws EmptyInput / ShapeMismatch.
std::vector<std::size_t> rrqr_select(std::span<const Vector> vectors,
                                     const Tolerances& tol = {});

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& x);

}  // namespace bincomp
