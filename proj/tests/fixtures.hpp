#pragma once

// Shared test helpers: instance generators and small independent oracles.

#include <algorithm>
#include <cmath>
#include <vector>

#include "bincomp/bcd.hpp"
#include "bincomp/scd.hpp"
#include "bincomp/schur.hpp"

#ifdef DOCTEST_LIBRARY_INCLUDED
/// Expects `expr` to throw bincomp::Error carrying `errc`.
#define CHECK_ERRC(expr, errc)                                   \
  do {                                                           \
    try {                                                        \
      (void)(expr);                                              \
      FAIL_CHECK("expected " << bincomp::to_string(errc));       \
    } catch (const bincomp::Error& err_) {                       \
      CHECK_MESSAGE(err_.code() == (errc), err_.what());         \
    }                                                            \
  } while (false)
#endif

namespace fixtures {

using namespace bincomp;

/// Dirichlet(1) weights with every entry >= 0.01.
inline Vector simplex_weights(Index r, Rng& rng) {
  while (true) {
    Vector w(r);
    for (Index i = 0; i < r; ++i) w(i) = -std::log1p(-rng.uniform());
    w /= w.sum();
    if (w.minCoeff() >= 0.01) return w;
  }
}

struct SignFixture {
  SignMatrix s;
  Vector tau;
  CorrelationMatrix a;
};

inline SignFixture sign_fixture(Index n, Index r, Rng& rng) {
  SignMatrix s = random_schur_independent_signs(n, r, rng);
  Vector tau = simplex_weights(r, rng);
  Matrix a = s.real() * tau.asDiagonal() * s.real().transpose();
  a.diagonal().setOnes();
  return {s, tau, CorrelationMatrix(SymMatrix(a))};
}

struct BinaryFixture {
  BinaryMatrix z;
  Vector tau;
  Matrix h;
};

inline BinaryFixture binary_fixture(Index n, Index r, Rng& rng) {
  BinaryMatrix z = random_binary_family_schur_independent(n, r, rng);
  Vector tau = simplex_weights(r, rng);
  return {z, tau, z.real() * tau.asDiagonal() * z.real().transpose()};
}

/// Normalized Gram matrix of n Gaussian vectors in R^dim.
inline Matrix random_correlation(Index n, Index dim, Rng& rng) {
  Matrix g(dim, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < dim; ++i) g(i, j) = rng.normal();
    g.col(j).normalize();
  }
  Matrix c = g.transpose() * g;
  c.diagonal().setOnes();
  return c;
}

/// Generator output in the library's canonical order.
inline std::pair<SignMatrix, Vector> canonical(SignMatrix s, const Vector& tau) {
  ConvexWeights w(tau / tau.sum());
  canonicalize(s, w);
  return {s, w.values()};
}

inline std::pair<BinaryMatrix, Vector> canonical(BinaryMatrix z, const Vector& tau) {
  ConvexWeights w(tau / tau.sum());
  canonicalize(z, w);
  return {z, w.values()};
}

/// Smallest eigenvalue through Eigen's plain solver, kept apart from the
/// library's own eigen helpers.
inline double min_eig(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (x + x.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Rank by singular values of the matrix itself (not its Gram matrix).
inline Index svd_rank(const Matrix& m, double rel = 1e-9) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  return static_cast<Index>((sv.array() > rel * sv(0)).count());
}

}  // namespace fixtures
