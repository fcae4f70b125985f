#pragma once

// Small dense semidefinite programs
//
//   maximize   <C, X>
//   subject to <A_k, X> = b_k,  k = 1..m,   X psd,
//
// solved with an infeasible primal-dual path-following method, plus the exact
// spectral deflation step used between decomposition rounds.

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bincomp/matcore.hpp"

namespace bincomp {

/// One equality constraint <A, X> = rhs. A is either a dense symmetric matrix
/// or a rank-one a a^t; the rank-one form lets the solver assemble its Schur
/// complement without materializing A.
class SdpConstraint {
 public:
  static SdpConstraint dense(SymMatrix a, double rhs);
  static SdpConstraint rank_one(Vector a, double rhs);

  bool is_rank_one() const noexcept { return std::holds_alternative<Vector>(data_); }
  const Vector& factor() const { return std::get<Vector>(data_); }
  const SymMatrix& dense_matrix() const { return std::get<SymMatrix>(data_); }
  /// The constraint matrix in dense form.
  SymMatrix matrix() const;
  Index dim() const;
  double rhs() const noexcept { return rhs_; }

  /// <A, X>
  double apply(const Matrix& x) const;

 private:
  SdpConstraint(std::variant<SymMatrix, Vector> data, double rhs)
      : data_(std::move(data)), rhs_(rhs) {}

  std::variant<SymMatrix, Vector> data_;
  double rhs_;
};

struct SdpProblem {
  SymMatrix objective;
  std::vector<SdpConstraint> constraints;

  Index dim() const noexcept { return objective.dim(); }
  /// Throws ShapeMismatch / EmptyInput / NonFinite.
  void validate() const;
};

enum class SdpStatus { Optimal, MaxIterations, Infeasible };

std::string_view to_string(SdpStatus status) noexcept;

struct SdpSolution {
  SymMatrix x_star;
  Vector y;                     // dual multipliers
  double objective_value = 0.0;
  double primal_residual = 0.0;  // max_k |<A_k, X> - b_k|
  double dual_residual = 0.0;    // ||sum y_k A_k - Z - C||_F
  double gap = 0.0;
  double min_eig = 0.0;
  int iterations = 0;
  SdpStatus status = SdpStatus::MaxIterations;
};

struct SdpIterationLog {
  int iteration = 0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double step_primal = 0.0;
  double step_dual = 0.0;
};

struct SolverOptions {
  int max_iterations = 200;
  double duality_gap_tol = 1e-8;
  double step_fraction = 0.98;
  /// X_0 = initial_scale * I when set; otherwise a least-squares fit of alpha I
  /// to the constraints.
  std::optional<double> initial_scale;
  /// Restrict to an exposed face before iterating when the constraints pin
  /// X to one (see solve_sdp).
  bool facial_reduction = true;
  std::function<void(const SdpIterationLog&)> log;
};

/// Programs whose feasible set has no interior (for example a face of the
/// elliptope cut out by a trace constraint) have no central path. When the
/// constraints fix trace(X) = t and some <A_k, X> = b_k meets the bound
/// lambda_max(A_k) t, the feasible set lies on that eigenspace of A_k; the
/// solver restricts to it, drops constraints that became dependent and lifts
/// the answer back. Residuals are always reported against the original
/// constraints; y is then zero.
///
/// Throws Error(NumericalBreakdown) when the Schur complement cannot be
/// factored even after regularization. Infeasible and MaxIterations are
/// reported through SdpSolution::status with the best iterate.
SdpSolution solve_sdp(const SdpProblem& problem, const SolverOptions& opts = {});

/// Recomputes the certificate of an Optimal solution outside the solver:
/// primal residual <= 1e-7 max(1, max|b|) and min eigenvalue >= -1e-7 lambda_max.
bool certify_solution(const SdpProblem& problem, const SdpSolution& sol);

/// zeta* = max{zeta : zeta M + (1 - zeta) Y psd} for PSD M and rank-one PSD Y
/// with range(Y) in range(M). Computed spectrally on range(M): with
/// W = (Q^t M Q)^{-1/2}, zeta* = min over eigenvalues lambda > 1 + tol of
/// W Q^t Y Q W of lambda / (lambda - 1).
///
/// Throws RangeMismatch, NotPsd, RankDegenerate (rank(M) <= 1) and
/// NoFiniteBound (no eigenvalue above 1 + tol).
double deflate_zeta(const SymMatrix& m, const SymMatrix& y, const Tolerances& tol = {},
                    double bound_tol = 1e-9);

}  // namespace bincomp
