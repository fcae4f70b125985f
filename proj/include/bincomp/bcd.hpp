#pragma once

// Binary component decomposition H = sum_i tau_i z_i z_i^t, z_i in {0,1}^n,
// by reduction to a sign component decomposition.

#include "bincomp/scd.hpp"

namespace bincomp {

/// Symmetric matrix with min eigenvalue >= -psd_tol * lambda_max.
class PsdInput {
 public:
  /// Throws NotPsd.
  explicit PsdInput(const SymMatrix& h, const Tolerances& tol = {});

  Index dim() const noexcept { return h_.dim(); }
  const SymMatrix& sym() const noexcept { return h_; }
  const Matrix& mat() const noexcept { return h_.mat(); }

 private:
  SymMatrix h_;
};

struct BinaryDecomposition {
  BinaryMatrix components;
  ConvexWeights weights;
  double residual_fro = 0.0;
  bool schur_certificate = false;
  ScdDiagnostics diagnostics;
};

/// R = I - e e^t / n
SymMatrix centering_projector(Index n);

/// The correlation matrix A with diag A = e and R (4H - A) R = 0:
/// G = 4 R H R, y = (e - diag G) / 2, A = G + e y^t + y e^t.
/// Throws NotPsdAfterReduction.
CorrelationMatrix bcd_to_scd_matrix(const PsdInput& h, const Tolerances& tol = {});

/// Constant c in n sum_i tau_i xi_i s_i = (4H - A) e - c e.
enum class SignConstant {
  TwoTrace,    // 2 trace(H), from expanding the identity
  TwoNTrace,   // 2 n trace(H); wrong by a factor n, kept for regression tests
};

/// Least-squares xi, rounded to +/-1. Throws SignResolutionFailed when some
/// |xi_i| is farther than round_tol from one or the rounded system leaves a
/// residual above 1e-6 n.
IntVector resolve_signs(const PsdInput& h, const CorrelationMatrix& a, const SignMatrix& s,
                        const ConvexWeights& w, const Tolerances& tol = {},
                        SignConstant constant = SignConstant::TwoTrace);

struct BcdOptions {
  ScdOptions scd;
  bool compressed = false;
  /// Fail unless the recovered family is binary Schur independent.
  bool require_certificate = true;
};

/// Columns sorted by weight descending, ties by lexicographic order (0 < 1).
void canonicalize(BinaryMatrix& z, ConvexWeights& w);

/// Throws DecompositionFailed naming the stage: reduction, the sign
/// decomposition stages, resolve_signs, residual or certificate.
BinaryDecomposition binary_component_decomposition(const PsdInput& h, Rng& rng,
                                                   const BcdOptions& opts = {});

}  // namespace bincomp
