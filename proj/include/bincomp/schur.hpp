#pragma once

// Schur independence of sign and binary families, the cardinality bound and
// random fixture generators.

#include <cstdint>

#include <Eigen/Dense>

#include "bincomp/matcore.hpp"
#include "bincomp/rng.hpp"

namespace bincomp {

using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<int, Eigen::Dynamic, 1>;

/// n x r matrix with entries exactly +1 or -1; columns are sign components.
class SignMatrix {
 public:
  SignMatrix() = default;
  /// Throws std::invalid_argument on an entry outside {+1, -1} or an empty
  /// shape.
  explicit SignMatrix(IntMatrix entries);

  Index n() const noexcept { return entries_.rows(); }
  Index r() const noexcept { return entries_.cols(); }
  const IntMatrix& entries() const noexcept { return entries_; }
  IntVector col(Index j) const { return entries_.col(j); }
  Matrix real() const { return entries_.cast<double>(); }

  friend bool operator==(const SignMatrix&, const SignMatrix&) = default;

 private:
  IntMatrix entries_;
};

/// n x r matrix with entries exactly 0 or 1; columns are binary components.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  explicit BinaryMatrix(IntMatrix entries);

  Index n() const noexcept { return entries_.rows(); }
  Index r() const noexcept { return entries_.cols(); }
  const IntMatrix& entries() const noexcept { return entries_; }
  IntVector col(Index j) const { return entries_.col(j); }
  Matrix real() const { return entries_.cast<double>(); }

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

 private:
  IntMatrix entries_;
};

/// F(z) = 2z - e
IntVector binary_to_sign(const IntVector& z);
/// F^{-1}(s) = (s + e) / 2
IntVector sign_to_binary(const IntVector& s);

/// The augmented sign family {e, F(z_1), ..., F(z_r)}.
SignMatrix augmented_sign_lift(const BinaryMatrix& z);

/// {e} together with s_i (.) s_j for i < j, as columns (n x (C(r,2)+1)).
IntMatrix schur_family(const SignMatrix& s);

struct SchurRank {
  Index achieved = 0;
  Index required = 0;
  bool independent() const noexcept { return achieved == required; }
};

/// Numerical rank of the Schur family via the eigenvalues of its Gram matrix.
SchurRank schur_rank_signs(const SignMatrix& s, const Tolerances& tol = {});

/// Rank of span{z_i (.) z_j : 0 <= i, j <= r} with z_0 = e, against the
/// C(r+1,2)+1 distinct products that span must reach.
SchurRank schur_rank_binary(const BinaryMatrix& z, const Tolerances& tol = {});

bool is_schur_independent_signs(const SignMatrix& s, const Tolerances& tol = {});

/// Evaluates both the direct binary span and the augmented sign-lift route;
/// debug builds assert that they agree.
bool is_schur_independent_binary(const BinaryMatrix& z, const Tolerances& tol = {});

/// Largest r with C(r,2) + 1 <= n, i.e. floor((1 + sqrt(8n - 7)) / 2), in
/// integer arithmetic.
std::uint64_t max_schur_rank(std::uint64_t n);

/// Exact rank of an integer matrix (fraction-free elimination over
/// arbitrary-precision integers). Slow; meant for verification.
Index exact_rank(const IntMatrix& m);

/// i.i.d. uniform signs. Throws RankTooLarge if r > max_schur_rank(n).
SignMatrix random_sign_family(Index n, Index r, Rng& rng);

/// Rejection sampling (at most 1000 rounds) for a Schur-independent family in
/// which no column equals +/- another. Throws RankTooLarge / GenerationFailed.
SignMatrix random_schur_independent_signs(Index n, Index r, Rng& rng,
                                          const Tolerances& tol = {});

/// Binary analogue: i.i.d. Bernoulli(1/2) entries until the family passes
/// is_schur_independent_binary. Requires r + 1 <= max_schur_rank(n).
BinaryMatrix random_binary_family_schur_independent(Index n, Index r, Rng& rng,
                                                    const Tolerances& tol = {});

}  // namespace bincomp
