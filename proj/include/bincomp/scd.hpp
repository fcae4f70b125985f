#pragma once

// Sign component decomposition A = sum_i tau_i s_i s_i^t of a low-rank
// correlation matrix: the full n x n program and the compressed r x r one.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bincomp/matcore.hpp"
#include "bincomp/rng.hpp"
#include "bincomp/schur.hpp"
#include "bincomp/sdp.hpp"

namespace bincomp {

/// Symmetric PSD matrix with unit diagonal.
class CorrelationMatrix {
 public:
  /// Throws NotCorrelation if some |A_ii - 1| > 1e-10 (the diagonal is then
  /// set to exactly one) and NotPsd below -psd_tol * lambda_max.
  explicit CorrelationMatrix(const SymMatrix& a, const Tolerances& tol = {});

  Index dim() const noexcept { return a_.dim(); }
  const SymMatrix& sym() const noexcept { return a_; }
  const Matrix& mat() const noexcept { return a_.mat(); }

 private:
  SymMatrix a_;
};

/// Strictly positive weights summing to one within 1e-10.
class ConvexWeights {
 public:
  ConvexWeights() = default;
  /// Throws Error(NotInOpenSimplex).
  explicit ConvexWeights(Vector values);

  Index size() const noexcept { return values_.size(); }
  const Vector& values() const noexcept { return values_; }
  double operator[](Index i) const { return values_(i); }

 private:
  Vector values_;
};

/// One pass of the outer loop.
struct ScdIterationRecord {
  int iteration = 0;
  Index rank = 0;             // rank of the iterate entering this pass
  int draws = 0;              // Gaussian directions tried
  double vertex_objective = 0.0;  // g^t s s^t g for the accepted vertex
  double zeta = 0.0;
  double sdp_residual = 0.0;
  int sdp_iterations = 0;
  double diag_deviation = 0.0;  // of the deflated iterate
  double min_eig = 0.0;         // of the deflated iterate, relative to lambda_max
};

struct ScdDiagnostics {
  std::vector<ScdIterationRecord> iterations;
  /// Wall-clock per stage in milliseconds: rank, sdp, extract, deflate,
  /// coefficients.
  std::map<std::string, double> timings_ms;
  int sdp_solves = 0;
  int sdp_iterations = 0;
  int redraws = 0;
  Index constraints_selected = 0;  // compressed path: |J| in the first pass
};

struct SignDecomposition {
  SignMatrix components;
  ConvexWeights weights;
  double residual_fro = 0.0;
  ScdDiagnostics diagnostics;
};

struct ScdOptions {
  Tolerances tol;
  SolverOptions solver;
  int max_redraws = 20;
  /// NotRankOne when lambda_2 > rank_one_ratio * lambda_1.
  double rank_one_ratio = 1e-4;
  /// Largest allowed |X - s s^t| entry after rounding.
  double max_entry_error = 1e-3;
  /// LargeResidual when ||A - sum tau_i s_i s_i^t||_F > residual_rel * n.
  double residual_rel = 1e-6;
  std::function<void(const ScdIterationRecord&)> on_iteration;
};

/// Projector onto range(A); psi(X) = trace(P X) / n.
SymMatrix face_separator(const CorrelationMatrix& a, const Tolerances& tol = {});
double face_value(const SymMatrix& p, const SymMatrix& x);

/// Sign vector of a numerically rank-one X ~ s s^t, first entry +1.
/// Throws NotRankOne / RoundingFailed.
IntVector extract_sign_vector(const SymMatrix& x, const ScdOptions& opts = {});

/// Least-squares weights of A over {s_i s_i^t}, in column order of `s`.
/// Throws NotInOpenSimplex / LargeResidual.
ConvexWeights solve_coefficients(const CorrelationMatrix& a, const SignMatrix& s,
                                 const ScdOptions& opts = {});

/// First entry of every column made +1; columns sorted by weight descending,
/// ties by lexicographic column order (-1 before +1).
void canonicalize(SignMatrix& s, ConvexWeights& w);

/// Full algorithm: per pass an n x n program with diag X = e and
/// trace(U^t X U) = n. Throws DecompositionFailed.
SignDecomposition sign_component_decomposition(const CorrelationMatrix& a, Rng& rng,
                                               const ScdOptions& opts = {});

/// Compressed algorithm: A = Q M Q^t, every pass works on the current range
/// of M with constraints chosen by rrqr_select. Draws the same Gaussian
/// vectors as the full algorithm. Throws DecompositionFailed.
SignDecomposition scd_compressed(const CorrelationMatrix& a, Rng& rng,
                                 const ScdOptions& opts = {});

struct VerificationReport {
  double residual = 0.0;
  bool schur_independent = false;
};

VerificationReport verify_decomposition(const CorrelationMatrix& a, const SignMatrix& s,
                                        const ConvexWeights& w, const Tolerances& tol = {});

/// ||A - sum w_i s_i s_i^t||_F
double reconstruction_residual(const Matrix& a, const Matrix& s, const Vector& w);

}  // namespace bincomp
