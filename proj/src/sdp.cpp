#include "bincomp/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace bincomp {

SdpConstraint SdpConstraint::dense(SymMatrix a, double rhs) {
  return SdpConstraint(std::move(a), rhs);
}

SdpConstraint SdpConstraint::rank_one(Vector a, double rhs) {
  return SdpConstraint(std::move(a), rhs);
}

SymMatrix SdpConstraint::matrix() const {
  if (is_rank_one()) return SymMatrix::outer(factor());
  return dense_matrix();
}

Index SdpConstraint::dim() const {
  return is_rank_one() ? factor().size() : dense_matrix().dim();
}

double SdpConstraint::apply(const Matrix& x) const {
  if (is_rank_one()) return factor().dot(x * factor());
  return dense_matrix().mat().cwiseProduct(x).sum();
}

void SdpProblem::validate() const {
  if (constraints.empty()) throw Error(Errc::EmptyInput, "SDP has no constraints");
  if (!objective.is_finite()) throw Error(Errc::NonFinite, "SDP objective is not finite");
  const Index d = dim();
  if (d < 1) throw Error(Errc::ShapeMismatch, "SDP dimension must be positive");
  for (const auto& c : constraints) {
    if (c.dim() != d) throw Error(Errc::ShapeMismatch, "SDP constraint dimension mismatch");
    if (!std::isfinite(c.rhs())) throw Error(Errc::NonFinite, "SDP right-hand side not finite");
  }
}

std::string_view to_string(SdpStatus status) noexcept {
  switch (status) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::MaxIterations: return "MaxIterations";
    case SdpStatus::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kFaceTol = 1e-9;

Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Constraint data split into a stacked rank-one block and a dense list.
class ConstraintOps {
 public:
  explicit ConstraintOps(const SdpProblem& p) : d_(p.dim()), m_(static_cast<Index>(p.constraints.size())) {
    b_.resize(m_);
    for (Index k = 0; k < m_; ++k) {
      const auto& c = p.constraints[static_cast<std::size_t>(k)];
      b_(k) = c.rhs();
      if (c.is_rank_one()) {
        rank_one_idx_.push_back(k);
      } else {
        dense_idx_.push_back(k);
        dense_.push_back(c.dense_matrix().mat());
      }
    }
    v_.resize(d_, static_cast<Index>(rank_one_idx_.size()));
    for (std::size_t j = 0; j < rank_one_idx_.size(); ++j) {
      v_.col(static_cast<Index>(j)) = p.constraints[static_cast<std::size_t>(rank_one_idx_[j])].factor();
    }
  }

  Index size() const { return m_; }
  const Vector& rhs() const { return b_; }

  /// (<A_k, H>)_k for a possibly non-symmetric H.
  Vector apply(const Matrix& h) const {
    Vector out(m_);
    if (!rank_one_idx_.empty()) {
      const Vector vals = v_.cwiseProduct(h * v_).colwise().sum().transpose();
      for (std::size_t j = 0; j < rank_one_idx_.size(); ++j) out(rank_one_idx_[j]) = vals(static_cast<Index>(j));
    }
    for (std::size_t j = 0; j < dense_idx_.size(); ++j) {
      out(dense_idx_[j]) = dense_[j].cwiseProduct(h).sum();
    }
    return out;
  }

  /// sum_k y_k A_k
  Matrix adjoint(const Vector& y) const {
    Matrix out = Matrix::Zero(d_, d_);
    if (!rank_one_idx_.empty()) {
      Vector w(static_cast<Index>(rank_one_idx_.size()));
      for (std::size_t j = 0; j < rank_one_idx_.size(); ++j) w(static_cast<Index>(j)) = y(rank_one_idx_[j]);
      out.noalias() += v_ * w.asDiagonal() * v_.transpose();
    }
    for (std::size_t j = 0; j < dense_idx_.size(); ++j) out += y(dense_idx_[j]) * dense_[j];
    return out;
  }

  /// Schur complement M_ij = <A_i, L A_j R>.
  Matrix schur(const Matrix& zinv, const Matrix& x) const {
    Matrix s(m_, m_);
    const auto nr = static_cast<Index>(rank_one_idx_.size());
    Matrix zv, xv;
    if (nr > 0) {
      zv = zinv * v_;
      xv = x * v_;
      const Matrix block = (v_.transpose() * zv).cwiseProduct(v_.transpose() * xv);
      for (Index a = 0; a < nr; ++a) {
        for (Index c = 0; c < nr; ++c) s(rank_one_idx_[a], rank_one_idx_[c]) = block(a, c);
      }
    }
    for (std::size_t j = 0; j < dense_idx_.size(); ++j) {
      const Matrix g = zinv * dense_[j] * x;
      const Index row = dense_idx_[j];
      if (nr > 0) {
        const Vector vals = v_.cwiseProduct(g * v_).colwise().sum().transpose();
        for (Index a = 0; a < nr; ++a) {
          s(row, rank_one_idx_[a]) = vals(a);
          s(rank_one_idx_[a], row) = vals(a);
        }
      }
      for (std::size_t l = 0; l < dense_idx_.size(); ++l) {
        s(row, dense_idx_[l]) = dense_[l].cwiseProduct(g).sum();
      }
    }
    return sym(s);
  }

  double max_constraint_norm() const {
    double out = 0.0;
    for (Index j = 0; j < v_.cols(); ++j) out = std::max(out, v_.col(j).squaredNorm());
    for (const auto& a : dense_) out = std::max(out, a.norm());
    return out;
  }

  /// Least-squares alpha for <A_k, alpha I> = b_k.
  double fitted_scale() const {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < rank_one_idx_.size(); ++j) {
      const double t = v_.col(static_cast<Index>(j)).squaredNorm();
      num += t * b_(rank_one_idx_[j]);
      den += t * t;
    }
    for (std::size_t j = 0; j < dense_idx_.size(); ++j) {
      const double t = dense_[j].trace();
      num += t * b_(dense_idx_[j]);
      den += t * t;
    }
    return den > 0.0 ? num / den : 0.0;
  }

 private:
  Index d_;
  Index m_;
  Vector b_;
  std::vector<Index> rank_one_idx_;
  std::vector<Index> dense_idx_;
  std::vector<Matrix> dense_;
  Matrix v_;
};

/// Largest step t with x + t dx psd (infinity if unbounded).
double max_step(const Matrix& x, const Matrix& dx) {
  Eigen::LLT<Matrix> llt(x);
  double lmin;
  if (llt.info() == Eigen::Success) {
    const Matrix& l = llt.matrixL();
    Matrix s = l.triangularView<Eigen::Lower>().solve(dx);
    s = l.triangularView<Eigen::Lower>().solve(s.transpose()).transpose();
    lmin = min_eigenvalue(sym(s));
  } else {
    // Fall back to a generalized eigenproblem through the spectral square root.
    const Spectrum es = eigh(x);
    const Vector d = es.values.cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const Matrix w = es.vectors * d.asDiagonal();
    lmin = min_eigenvalue(sym(w.transpose() * dx * w));
  }
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

struct LinearSolve {
  Eigen::LLT<Matrix> llt;
  bool ok = false;
};

LinearSolve factor_schur(const Matrix& m) {
  LinearSolve out;
  out.llt.compute(m);
  if (out.llt.info() == Eigen::Success) {
    out.ok = true;
    return out;
  }
  // One regularized retry.
  const double shift = 1e-12 * std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
  out.llt.compute(m + shift * Matrix::Identity(m.rows(), m.cols()));
  out.ok = out.llt.info() == Eigen::Success;
  return out;
}

struct Scaling {
  Matrix g, g_inv, w;
  Vector v;
  bool ok = false;
};

/// Symmetric square root of a positive definite matrix, or nullopt.
std::optional<Matrix> sqrt_pd(const Matrix& a) {
  const Spectrum es = eigh(a);
  if (!(es.values(0) > 0.0)) return std::nullopt;
  return es.vectors * es.values.cwiseSqrt().asDiagonal() * es.vectors.transpose();
}

Scaling nt_scaling(const Matrix& x, const Matrix& z) {
  Scaling out;
  const auto fx = sqrt_pd(x);
  const auto fz = sqrt_pd(z);
  if (!fx || !fz) return out;
  // SVD of Fz^t Fx = U S V^t gives G = Fx V S^{-1/2}.
  Eigen::JacobiSVD<Matrix> svd(fz->transpose() * *fx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector s = svd.singularValues();
  if (!(s.minCoeff() > 0.0)) return out;
  const Vector s_isqrt = s.cwiseSqrt().cwiseInverse();
  out.v = s;
  out.g = *fx * svd.matrixV() * s_isqrt.asDiagonal();
  // Fx^{-1} = V S^{-1} U^t Fz^t, so G^{-1} = S^{-1/2} U^t Fz^t.
  out.g_inv = s_isqrt.asDiagonal() * svd.matrixU().transpose() * fz->transpose();
  out.w = sym(out.g * out.g.transpose());
  out.ok = true;
  return out;
}


SdpSolution solve_reduced(const SdpProblem& problem, const SolverOptions& opts) {
  const Index d = problem.dim();
  const ConstraintOps ops(problem);
  const Matrix& c = problem.objective.mat();
  const Vector& b = ops.rhs();
  const double b_scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  const double c_scale = std::max(1.0, c.norm());

  double xi = opts.initial_scale.value_or(ops.fitted_scale());
  if (!(xi > 0.0)) xi = std::max(1.0, b.cwiseAbs().mean() / static_cast<double>(d));
  xi = std::max(xi, 1.0);
  const double eta = std::max({10.0, std::sqrt(static_cast<double>(d)), c.norm(),
                               ops.max_constraint_norm()});

  Matrix x = xi * Matrix::Identity(d, d);
  Matrix z = eta * Matrix::Identity(d, d);
  Vector y = Vector::Zero(ops.size());

  SdpSolution sol;
  // Best iterate by the worst of the three relative optimality measures.
  struct Snapshot {
    Matrix x;
    Vector y;
    double score = std::numeric_limits<double>::infinity();
    double pobj = 0.0, pres = 0.0, dres = 0.0, gap = 0.0;
    int iteration = 0;
  } best;
  int stalled = 0;
  int since_best = 0;
  int it = 0;
  const Matrix eye = Matrix::Identity(d, d);
  for (; it <= opts.max_iterations; ++it) {
    const Vector rp = b - ops.apply(x);
    const Matrix rd = ops.adjoint(y) - z - c;
    const double pobj = c.cwiseProduct(x).sum();
    const double dobj = b.dot(y);
    const double xz = x.cwiseProduct(z).sum();
    const double pres = rp.cwiseAbs().maxCoeff();
    const double dres = rd.norm();
    const double gap = std::max(xz, std::abs(pobj - dobj));

    sol.objective_value = pobj;
    sol.primal_residual = pres;
    sol.dual_residual = dres;
    sol.gap = gap;
    sol.iterations = it;

    const double score = std::max({gap / (opts.duality_gap_tol * (1.0 + std::abs(pobj))),
                                   pres / (kFeasTol * b_scale), dres / (kFeasTol * c_scale)});
    if (score < best.score) {
      best = Snapshot{x, y, score, pobj, pres, dres, gap, it};
      since_best = 0;
    } else {
      ++since_best;
    }
    if (score <= 1.0) {
      sol.status = SdpStatus::Optimal;
      break;
    }
    // Problems whose feasible set has no interior (e.g. a face of the
    // elliptope) lose accuracy near the optimum; stop once progress stalls.
    if (it == opts.max_iterations || stalled >= 3 || since_best >= 8) break;

    // Nesterov-Todd scaling: G with G G^t = W, W Z W = X and
    // G^t Z G = G^{-1} X G^{-t} = diag(v).
    const Scaling sc = nt_scaling(x, z);
    if (!sc.ok) break;
    const Matrix schur_matrix = ops.schur(sc.w, sc.w);
    const LinearSolve schur = factor_schur(schur_matrix);
    if (!schur.ok) {
      throw Error(Errc::NumericalBreakdown, "solve_sdp: Schur complement is not positive definite");
    }

    const double mu = xz / static_cast<double>(d);
    const Matrix w_rd_w = sc.w * rd * sc.w;

    struct Direction {
      Matrix dx, dz;
      Vector dy;
    };
    // Solves dX + W dZ W = rc together with the linearized feasibility
    // equations.
    auto direction = [&](const Matrix& rc) {
      Direction dir;
      const Matrix h = rc - w_rd_w;
      const Vector rhs = ops.apply(h) - rp;
      dir.dy = schur.llt.solve(rhs);
      dir.dy += schur.llt.solve(rhs - schur_matrix * dir.dy);
      const Matrix aty = ops.adjoint(dir.dy);
      dir.dz = aty + rd;
      dir.dx = sym(h - sc.w * aty * sc.w);
      return dir;
    };
    // Scaled complementarity target r -> G K G^t with v K + K v = 2 r.
    auto lyap = [&](const Matrix& r) {
      Matrix k(d, d);
      for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) k(i, j) = 2.0 * r(i, j) / (sc.v(i) + sc.v(j));
      }
      return Matrix(sym(sc.g * k * sc.g.transpose()));
    };
    auto steps = [&](const Direction& dir) {
      const double ap = std::min(1.0, opts.step_fraction * max_step(x, dir.dx));
      const double ad = std::min(1.0, opts.step_fraction * max_step(z, dir.dz));
      return std::pair{ap, ad};
    };

    const Matrix v2 = sc.v.array().square().matrix().asDiagonal();
    // Predictor (sigma = 0).
    const Direction pred = direction(lyap(-v2));
    const auto [ap0, ad0] = steps(pred);
    const double xz_pred = (x + ap0 * pred.dx).cwiseProduct(z + ad0 * pred.dz).sum();
    const double expon = std::max(1.0, 3.0 * std::pow(std::min(ap0, ad0), 2));
    double sigma = std::pow(std::max(0.0, xz_pred) / xz, expon);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector with the second-order term in scaled coordinates.
    const Matrix dxs = sc.g_inv * pred.dx * sc.g_inv.transpose();
    const Matrix dzs = sc.g.transpose() * pred.dz * sc.g;
    const Matrix target = sigma * mu * Matrix::Identity(d, d) - v2 - sym(dxs * dzs);
    const Direction corr = direction(lyap(target));
    const auto [ap, ad] = steps(corr);

    x = sym(x + ap * corr.dx);
    y += ad * corr.dy;
    z = sym(z + ad * corr.dz);

    stalled = (ap < 1e-10 && ad < 1e-10) ? stalled + 1 : 0;

    if (opts.log) {
      opts.log(SdpIterationLog{it + 1, gap, pres, dres, ap, ad});
    }
  }

  if (sol.status != SdpStatus::Optimal && best.score < std::numeric_limits<double>::infinity()) {
    x = best.x;
    y = best.y;
    sol.objective_value = best.pobj;
    sol.primal_residual = best.pres;
    sol.dual_residual = best.dres;
    sol.gap = best.gap;
  }
  sol.x_star = SymMatrix(x, 1e-8);
  sol.y = y;
  sol.min_eig = min_eigenvalue(x);
  if (sol.status != SdpStatus::Optimal) {
    sol.status = sol.primal_residual > 1e-3 * b_scale ? SdpStatus::Infeasible
                                                      : SdpStatus::MaxIterations;
  }
  return sol;
}

/// One facial-reduction step. If the constraints fix trace(X) = t (the
/// identity lies in their span) and some constraint sits at the spectral bound
/// <A_k, X> <= lambda_max(A_k) t (or the lower one), every feasible X lives
/// on the matching extreme eigenspace of A_k. Returns that basis.
std::optional<Matrix> exposed_face(const SdpProblem& p) {
  const Index d = p.dim();
  const auto m = static_cast<Index>(p.constraints.size());
  const Index len = d * (d + 1) / 2;
  Matrix a(len, m);
  for (Index k = 0; k < m; ++k) a.col(k) = svec(p.constraints[static_cast<std::size_t>(k)].matrix());
  const Vector e = svec(SymMatrix::identity(d));
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  const Vector coef = qr.solve(e);
  if ((a * coef - e).norm() > kFaceTol * e.norm()) return std::nullopt;
  Vector b(m);
  for (Index k = 0; k < m; ++k) b(k) = p.constraints[static_cast<std::size_t>(k)].rhs();
  const double trace = coef.dot(b);
  if (!(trace > 0.0)) return std::nullopt;

  for (const auto& c : p.constraints) {
    const EigDecomposition eig = sym_eig(c.matrix());
    const Vector& lam = eig.eigenvalues;
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    const double tol = kFaceTol * scale;
    const double slack = kFaceTol * std::max(1.0, std::abs(c.rhs()));
    std::vector<Index> keep;
    if (std::abs(lam(0) * trace - c.rhs()) <= slack) {
      for (Index i = 0; i < d; ++i)
        if (lam(i) >= lam(0) - tol) keep.push_back(i);
    } else if (std::abs(lam(d - 1) * trace - c.rhs()) <= slack) {
      for (Index i = 0; i < d; ++i)
        if (lam(i) <= lam(d - 1) + tol) keep.push_back(i);
    }
    if (keep.empty() || static_cast<Index>(keep.size()) == d) continue;
    Matrix v(d, static_cast<Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) v.col(static_cast<Index>(j)) = eig.eigenvectors.col(keep[j]);
    return v;
  }
  return std::nullopt;
}

/// V^t A V for every constraint, keeping a linearly independent subset.
SdpProblem restrict_to_face(const SdpProblem& p, const Matrix& v) {
  SdpProblem out{SymMatrix(v.transpose() * p.objective.mat() * v, 1e-6), {}};
  std::vector<SdpConstraint> all;
  std::vector<Vector> vecs;
  for (const auto& c : p.constraints) {
    if (c.is_rank_one()) {
      all.push_back(SdpConstraint::rank_one(v.transpose() * c.factor(), c.rhs()));
    } else {
      all.push_back(SdpConstraint::dense(
          SymMatrix(v.transpose() * c.dense_matrix().mat() * v, 1e-6), c.rhs()));
    }
    vecs.push_back(svec(all.back().matrix()));
  }
  for (std::size_t k : rrqr_select(vecs, Tolerances{})) out.constraints.push_back(all[k]);
  return out;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SolverOptions& opts) {
  problem.validate();
  if (!(opts.step_fraction > 0.0 && opts.step_fraction < 1.0) || opts.max_iterations < 1 ||
      !(opts.duality_gap_tol > 0.0)) {
    throw std::invalid_argument("solve_sdp: invalid solver options");
  }
  const Index d = problem.dim();
  Matrix basis = Matrix::Identity(d, d);
  SdpProblem reduced = problem;
  if (opts.facial_reduction) {
    while (reduced.dim() > 1) {
      const auto face = exposed_face(reduced);
      if (!face) break;
      basis = basis * *face;
      reduced = restrict_to_face(problem, basis);
    }
  }
  if (basis.cols() == d) return solve_reduced(problem, opts);

  SdpSolution sol = solve_reduced(reduced, opts);
  // Lift back and report against the original constraints.
  const Matrix x = basis * sol.x_star.mat() * basis.transpose();
  double pres = 0.0;
  for (const auto& c : problem.constraints) pres = std::max(pres, std::abs(c.apply(x) - c.rhs()));
  double b_scale = 1.0;
  for (const auto& c : problem.constraints) b_scale = std::max(b_scale, std::abs(c.rhs()));
  sol.x_star = SymMatrix(x, 1e-8);
  sol.objective_value = problem.objective.mat().cwiseProduct(x).sum();
  sol.primal_residual = pres;
  sol.min_eig = min_eigenvalue(x);
  sol.y = Vector::Zero(static_cast<Index>(problem.constraints.size()));
  if (sol.status == SdpStatus::Optimal && pres > kFeasTol * 1e2 * b_scale) {
    sol.status = pres > 1e-3 * b_scale ? SdpStatus::Infeasible : SdpStatus::MaxIterations;
  }
  return sol;
}

bool certify_solution(const SdpProblem& problem, const SdpSolution& sol) {
  const Matrix& x = sol.x_star.mat();
  double bmax = 0.0;
  double resid = 0.0;
  for (const auto& c : problem.constraints) {
    bmax = std::max(bmax, std::abs(c.rhs()));
    resid = std::max(resid, std::abs(c.apply(x) - c.rhs()));
  }
  const Vector lam = eigh(x, false).values;
  const double lmin = lam(0);
  const double lmax = lam(lam.size() - 1);
  return resid <= 1e-7 * std::max(1.0, bmax) && lmin >= -1e-7 * std::max(lmax, 0.0);
}

double deflate_zeta(const SymMatrix& m, const SymMatrix& y, const Tolerances& tol,
                    double bound_tol) {
  if (m.dim() != y.dim()) throw Error(Errc::ShapeMismatch, "deflate_zeta: dimension mismatch");
  const Matrix q = orth_basis(m, tol);
  if (q.cols() <= 1) {
    throw Error(Errc::RankDegenerate, "deflate_zeta: M has rank <= 1, nothing to deflate");
  }
  const Matrix& ym = y.mat();
  const Matrix qty = q.transpose() * ym;
  const double y_norm = ym.norm();
  if ((ym - q * qty).norm() > 1e-6 * y_norm) {
    throw Error(Errc::RangeMismatch, "deflate_zeta: range(Y) is not contained in range(M)");
  }
  const Matrix mt = sym(q.transpose() * m.mat() * q);
  const Matrix yt = sym(qty * q);
  const Vector ly = eigh(yt, false).values;
  if (ly(0) < -tol.psd_tol * std::max(1.0, ly.cwiseAbs().maxCoeff())) {
    throw Error(Errc::NotPsd, "deflate_zeta: Y is not psd");
  }
  const Spectrum em = eigh(mt);
  const Vector inv_sqrt = em.values.cwiseSqrt().cwiseInverse();
  const Matrix w = em.vectors * inv_sqrt.asDiagonal() * em.vectors.transpose();
  const Vector lk = eigh(sym(w * yt * w), false).values;
  double zeta = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < lk.size(); ++i) {
    const double lambda = lk(i);
    if (lambda > 1.0 + bound_tol) zeta = std::min(zeta, lambda / (lambda - 1.0));
  }
  if (!std::isfinite(zeta)) {
    throw Error(Errc::NoFiniteBound, "deflate_zeta: no eigenvalue exceeds one");
  }
  return zeta;
}

}  // namespace bincomp
