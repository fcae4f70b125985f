#include "bincomp/schur.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cassert>
#include <stdexcept>
#include <string>
#include <vector>

namespace bincomp {

namespace {

constexpr int kMaxRejections = 1000;

Index choose2(Index r) { return r * (r - 1) / 2; }

Index gram_rank(const Matrix& family, const Tolerances& tol) {
  if (family.cols() == 0) return 0;
  const Matrix gram = family.transpose() * family;
  const Vector lambda = eigh(gram, false).values;
  const double top = lambda.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > tol.rank_rel_tol * top) ++rank;
  }
  return rank;
}

}  // namespace

SignMatrix::SignMatrix(IntMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    throw std::invalid_argument("SignMatrix: empty shape");
  }
  for (Index k = 0; k < entries_.size(); ++k) {
    const int v = entries_.data()[k];
    if (v != 1 && v != -1) throw std::invalid_argument("SignMatrix: entry not +/-1");
  }
}

BinaryMatrix::BinaryMatrix(IntMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    throw std::invalid_argument("BinaryMatrix: empty shape");
  }
  for (Index k = 0; k < entries_.size(); ++k) {
    const int v = entries_.data()[k];
    if (v != 0 && v != 1) throw std::invalid_argument("BinaryMatrix: entry not 0/1");
  }
}

IntVector binary_to_sign(const IntVector& z) {
  return (2 * z.array() - 1).matrix();
}

IntVector sign_to_binary(const IntVector& s) {
  return ((s.array() + 1) / 2).matrix();
}

SignMatrix augmented_sign_lift(const BinaryMatrix& z) {
  IntMatrix lifted(z.n(), z.r() + 1);
  lifted.col(0).setOnes();
  for (Index j = 0; j < z.r(); ++j) lifted.col(j + 1) = binary_to_sign(z.col(j));
  return SignMatrix(std::move(lifted));
}

IntMatrix schur_family(const SignMatrix& s) {
  const Index r = s.r();
  IntMatrix family(s.n(), choose2(r) + 1);
  family.col(0).setOnes();
  Index k = 1;
  for (Index i = 0; i < r; ++i) {
    for (Index j = i + 1; j < r; ++j) {
      family.col(k++) = s.entries().col(i).cwiseProduct(s.entries().col(j));
    }
  }
  return family;
}

SchurRank schur_rank_signs(const SignMatrix& s, const Tolerances& tol) {
  const IntMatrix family = schur_family(s);
  return {gram_rank(family.cast<double>(), tol), family.cols()};
}

SchurRank schur_rank_binary(const BinaryMatrix& z, const Tolerances& tol) {
  // Distinct products with z_0 = e: e, z_i (= z_0 (.) z_i = z_i (.) z_i) and
  // z_i (.) z_j for 1 <= i < j.
  const Index r = z.r();
  IntMatrix family(z.n(), 1 + r + choose2(r));
  family.col(0).setOnes();
  for (Index i = 0; i < r; ++i) family.col(1 + i) = z.entries().col(i);
  Index k = 1 + r;
  for (Index i = 0; i < r; ++i) {
    for (Index j = i + 1; j < r; ++j) {
      family.col(k++) = z.entries().col(i).cwiseProduct(z.entries().col(j));
    }
  }
  return {gram_rank(family.cast<double>(), tol), family.cols()};
}

bool is_schur_independent_signs(const SignMatrix& s, const Tolerances& tol) {
  if (choose2(s.r()) + 1 > s.n()) return false;
  return schur_rank_signs(s, tol).independent();
}

bool is_schur_independent_binary(const BinaryMatrix& z, const Tolerances& tol) {
  const bool direct = schur_rank_binary(z, tol).independent();
  const bool lifted = is_schur_independent_signs(augmented_sign_lift(z), tol);
  assert(direct == lifted && "binary Schur independence routes disagree");
  return direct && lifted;
}

std::uint64_t max_schur_rank(std::uint64_t n) {
  if (n == 0) return 0;
  // r = floor((1 + isqrt(8n - 7)) / 2); floor(sqrt) is exact here because
  // (1 + x) / 2 is monotone in x and we only need floor(x).
  const std::uint64_t arg = 8 * n - 7;
  auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(arg)));
  while (root * root > arg) --root;
  while ((root + 1) * (root + 1) <= arg) ++root;
  return (1 + root) / 2;
}

Index exact_rank(const IntMatrix& m) {
  using boost::multiprecision::cpp_int;
  const Index rows = m.rows();
  const Index cols = m.cols();
  std::vector<std::vector<cpp_int>> a(static_cast<std::size_t>(rows),
                                      std::vector<cpp_int>(static_cast<std::size_t>(cols)));
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) a[i][j] = m(i, j);
  }
  // Bareiss: every division below is exact.
  cpp_int prev = 1;
  Index rank = 0;
  for (Index col = 0; col < cols && rank < rows; ++col) {
    Index pivot = -1;
    for (Index i = rank; i < rows; ++i) {
      if (a[i][col] != 0) {
        pivot = i;
        break;
      }
    }
    if (pivot < 0) continue;
    std::swap(a[pivot], a[rank]);
    for (Index i = rank + 1; i < rows; ++i) {
      for (Index j = col + 1; j < cols; ++j) {
        a[i][j] = (a[rank][col] * a[i][j] - a[i][col] * a[rank][j]) / prev;
      }
      a[i][col] = 0;
    }
    prev = a[rank][col];
    ++rank;
  }
  return rank;
}

SignMatrix random_sign_family(Index n, Index r, Rng& rng) {
  if (n < 1 || r < 1) throw std::invalid_argument("random_sign_family: n, r must be >= 1");
  if (static_cast<std::uint64_t>(r) > max_schur_rank(static_cast<std::uint64_t>(n))) {
    throw Error(Errc::RankTooLarge, "r = " + std::to_string(r) + " exceeds max_schur_rank(" +
                                        std::to_string(n) + ")");
  }
  IntMatrix s(n, r);
  for (Index j = 0; j < r; ++j) {
    for (Index i = 0; i < n; ++i) s(i, j) = rng.sign();
  }
  return SignMatrix(std::move(s));
}

namespace {

bool has_plus_minus_duplicate(const IntMatrix& s) {
  for (Index i = 0; i < s.cols(); ++i) {
    for (Index j = i + 1; j < s.cols(); ++j) {
      if (s.col(i) == s.col(j) || s.col(i) == -s.col(j)) return true;
    }
  }
  return false;
}

}  // namespace

SignMatrix random_schur_independent_signs(Index n, Index r, Rng& rng,
                                          const Tolerances& tol) {
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    SignMatrix s = random_sign_family(n, r, rng);
    if (!has_plus_minus_duplicate(s.entries()) && is_schur_independent_signs(s, tol)) {
      return s;
    }
  }
  throw Error(Errc::GenerationFailed, "no Schur-independent sign family after " +
                                          std::to_string(kMaxRejections) + " draws");
}

BinaryMatrix random_binary_family_schur_independent(Index n, Index r, Rng& rng,
                                                    const Tolerances& tol) {
  if (n < 1 || r < 1) {
    throw std::invalid_argument("random_binary_family: n, r must be >= 1");
  }
  if (static_cast<std::uint64_t>(r + 1) > max_schur_rank(static_cast<std::uint64_t>(n))) {
    throw Error(Errc::RankTooLarge, "augmented family of size " + std::to_string(r + 1) +
                                        " exceeds max_schur_rank(" + std::to_string(n) + ")");
  }
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    IntMatrix z(n, r);
    for (Index j = 0; j < r; ++j) {
      for (Index i = 0; i < n; ++i) z(i, j) = rng.sign() > 0 ? 1 : 0;
    }
    BinaryMatrix candidate(std::move(z));
    if (is_schur_independent_binary(candidate, tol)) return candidate;
  }
  throw Error(Errc::GenerationFailed, "no Schur-independent binary family after " +
                                          std::to_string(kMaxRejections) + " draws");
}

}  // namespace bincomp
