#include "bincomp/scd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace bincomp {

CorrelationMatrix::CorrelationMatrix(const SymMatrix& a, const Tolerances& tol) {
  const Index n = a.dim();
  if (n < 1) throw Error(Errc::EmptyInput, "correlation matrix is empty");
  const double dev = (a.mat().diagonal().array() - 1.0).abs().maxCoeff();
  if (dev > 1e-10) {
    throw Error(Errc::NotCorrelation,
                "diagonal deviates from one by " + std::to_string(dev));
  }
  Matrix m = a.mat();
  m.diagonal().setOnes();
  const double lmin = min_eigenvalue(m);
  const double lmax = sym_eig(SymMatrix(m)).eigenvalues(0);
  if (lmin < -tol.psd_tol * std::max(lmax, 0.0)) {
    throw Error(Errc::NotPsd, "correlation matrix has eigenvalue " + std::to_string(lmin));
  }
  a_ = SymMatrix(m);
}

ConvexWeights::ConvexWeights(Vector values) : values_(std::move(values)) {
  if (values_.size() < 1) throw Error(Errc::NotInOpenSimplex, "no weights");
  for (Index i = 0; i < values_.size(); ++i) {
    if (!(values_(i) > 0.0)) {
      throw Error(Errc::NotInOpenSimplex, "weight " + std::to_string(i) + " is not positive");
    }
  }
  if (std::abs(values_.sum() - 1.0) > 1e-10) {
    throw Error(Errc::NotInOpenSimplex, "weights do not sum to one");
  }
}

SymMatrix face_separator(const CorrelationMatrix& a, const Tolerances& tol) {
  return orth_projector(orth_basis(a.sym(), tol));
}

double face_value(const SymMatrix& p, const SymMatrix& x) {
  return p.mat().cwiseProduct(x.mat()).sum() / static_cast<double>(p.dim());
}

double reconstruction_residual(const Matrix& a, const Matrix& s, const Vector& w) {
  return (a - s * w.asDiagonal() * s.transpose()).norm();
}

namespace {

using Clock = std::chrono::steady_clock;

/// Adds the lifetime of the object to timings_ms[name].
class StageTimer {
 public:
  StageTimer(ScdDiagnostics& diag, const char* name)
      : diag_(diag), name_(name), start_(Clock::now()) {}
  ~StageTimer() {
    diag_.timings_ms[name_] +=
        std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
  }
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;

 private:
  ScdDiagnostics& diag_;
  const char* name_;
  Clock::time_point start_;
};

/// x ~ s for a sign vector s; returns s with s(0) = +1.
IntVector round_signs(const Vector& x, const ScdOptions& opts) {
  IntVector s(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (std::abs(std::abs(x(i)) - 1.0) > opts.tol.round_tol) {
      throw Error(Errc::RoundingFailed, "entry " + std::to_string(i) + " = " +
                                            std::to_string(x(i)) + " is not near +/-1");
    }
    s(i) = x(i) > 0.0 ? 1 : -1;
  }
  if (s(0) < 0) s = -s;
  return s;
}

void check_rank_one(const Vector& eigenvalues, const ScdOptions& opts) {
  const double l1 = eigenvalues(0);
  if (!(l1 > 0.0)) throw Error(Errc::NotRankOne, "no positive eigenvalue");
  if (eigenvalues.size() > 1 && eigenvalues(1) > opts.rank_one_ratio * l1) {
    throw Error(Errc::NotRankOne, "second eigenvalue ratio " +
                                      std::to_string(eigenvalues(1) / l1));
  }
}

void check_entries(const Matrix& x, const IntVector& s, const ScdOptions& opts) {
  const Vector sd = s.cast<double>();
  const double err = (x - sd * sd.transpose()).cwiseAbs().maxCoeff();
  if (err > opts.max_entry_error) {
    throw Error(Errc::RoundingFailed, "|X - s s^t|_max = " + std::to_string(err));
  }
}

Errc status_error(SdpStatus status) {
  return status == SdpStatus::Infeasible ? Errc::Infeasible : Errc::MaxIterations;
}

/// Runs `attempt(g)` with fresh Gaussian directions until it succeeds or the
/// redraw budget is spent. `stage` names the step that threw.
template <class Attempt>
IntVector with_redraws(Index n, Rng& rng, const ScdOptions& opts, ScdDiagnostics& diag,
                       ScdIterationRecord& rec, std::string& stage, Attempt&& attempt) {
  Errc cause = Errc::NotRankOne;
  std::string detail;
  for (int draw = 0; draw <= opts.max_redraws; ++draw) {
    const Vector g = rng.normal_vector(n);
    rec.draws = draw + 1;
    if (draw > 0) ++diag.redraws;
    try {
      return attempt(g);
    } catch (const Error& e) {
      cause = e.code();
      detail = e.what();
    }
  }
  throw DecompositionFailed(stage, cause,
                            detail + " (" + std::to_string(opts.max_redraws + 1) + " draws)");
}

/// zeta* M + (1 - zeta*) y y^t and the step used.
struct Deflated {
  Matrix next;
  double zeta = 0.0;
};

Deflated deflate(const Matrix& cur, const Vector& y, const ScdOptions& opts) {
  Deflated out;
  try {
    out.zeta = deflate_zeta(SymMatrix(cur, 1e-8), SymMatrix::outer(y), opts.tol);
  } catch (const Error& e) {
    throw DecompositionFailed("deflate", e.code(), e.what());
  }
  out.next = out.zeta * cur + (1.0 - out.zeta) * (y * y.transpose());
  out.next = 0.5 * (out.next + out.next.transpose());
  return out;
}

void require_rank(const Matrix& m, Index expected, const ScdOptions& opts) {
  const Index got = numerical_rank(SymMatrix(m, 1e-8), opts.tol);
  if (got != expected) {
    throw DecompositionFailed("deflate", Errc::RankDegenerate,
                              "rank after deflation is " + std::to_string(got) + ", expected " +
                                  std::to_string(expected));
  }
}

double relative_min_eig(const Matrix& m) {
  const EigDecomposition e = sym_eig(SymMatrix(m, 1e-8));
  const double top = std::max(e.eigenvalues(0), 1e-300);
  return e.eigenvalues(e.eigenvalues.size() - 1) / top;
}

bool lex_less(const IntMatrix& s, Index a, Index b) {
  for (Index i = 0; i < s.rows(); ++i) {
    if (s(i, a) != s(i, b)) return s(i, a) < s(i, b);
  }
  return false;
}

SignMatrix permute_columns(const IntMatrix& s, const std::vector<Index>& order) {
  IntMatrix out(s.rows(), static_cast<Index>(order.size()));
  for (std::size_t j = 0; j < order.size(); ++j) out.col(static_cast<Index>(j)) = s.col(order[j]);
  return SignMatrix(std::move(out));
}

/// Lexicographic presort, weights on the original A, canonical order. Both
/// algorithms finish here so equal component sets give equal weights.
SignDecomposition finish(const CorrelationMatrix& a, const std::vector<IntVector>& found,
                         const ScdOptions& opts, ScdDiagnostics diag) {
  IntMatrix raw(a.dim(), static_cast<Index>(found.size()));
  for (std::size_t j = 0; j < found.size(); ++j) raw.col(static_cast<Index>(j)) = found[j];
  std::vector<Index> order(found.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index x, Index y) { return lex_less(raw, x, y); });
  SignMatrix s = permute_columns(raw, order);

  ConvexWeights w;
  {
    StageTimer timer(diag, "coefficients");
    try {
      w = solve_coefficients(a, s, opts);
    } catch (const Error& e) {
      throw DecompositionFailed("coefficients", e.code(), e.what());
    }
  }
  canonicalize(s, w);
  SignDecomposition out{s, w, reconstruction_residual(a.mat(), s.real(), w.values()),
                        std::move(diag)};
  return out;
}

SignDecomposition rank_one_case(const CorrelationMatrix& a, const ScdOptions& opts,
                                ScdDiagnostics diag) {
  IntVector s;
  {
    StageTimer timer(diag, "extract");
    try {
      s = extract_sign_vector(a.sym(), opts);
    } catch (const Error& e) {
      throw DecompositionFailed("final_extract", e.code(), e.what());
    }
  }
  return finish(a, {s}, opts, std::move(diag));
}

Index input_rank(const CorrelationMatrix& a, const ScdOptions& opts) {
  try {
    return numerical_rank(a.sym(), opts.tol);
  } catch (const Error& e) {
    throw DecompositionFailed("rank", e.code(), e.what());
  }
}

void report(const ScdOptions& opts, ScdDiagnostics& diag, const ScdIterationRecord& rec) {
  diag.iterations.push_back(rec);
  if (opts.on_iteration) opts.on_iteration(rec);
}

}  // namespace

IntVector extract_sign_vector(const SymMatrix& x, const ScdOptions& opts) {
  const EigDecomposition e = sym_eig(x);
  check_rank_one(e.eigenvalues, opts);
  const IntVector s = round_signs(std::sqrt(e.eigenvalues(0)) * e.eigenvectors.col(0), opts);
  check_entries(x.mat(), s, opts);
  return s;
}

ConvexWeights solve_coefficients(const CorrelationMatrix& a, const SignMatrix& s,
                                 const ScdOptions& opts) {
  if (s.n() != a.dim()) throw Error(Errc::ShapeMismatch, "component length differs from n");
  const Index n = a.dim();
  const Index len = n * (n + 1) / 2;
  Matrix sys(len, s.r());
  const Matrix sr = s.real();
  for (Index j = 0; j < s.r(); ++j) sys.col(j) = svec(SymMatrix::outer(sr.col(j)));
  Eigen::ColPivHouseholderQR<Matrix> qr(sys);
  if (qr.rank() < s.r()) {
    throw Error(Errc::LargeResidual, "components s_i s_i^t are linearly dependent");
  }
  Vector tau = qr.solve(svec(a.sym()));
  for (Index i = 0; i < tau.size(); ++i) {
    if (!(tau(i) > 1e-10)) {
      throw Error(Errc::NotInOpenSimplex,
                  "weight " + std::to_string(i) + " = " + std::to_string(tau(i)));
    }
  }
  tau /= tau.sum();
  const double res = reconstruction_residual(a.mat(), sr, tau);
  if (res > opts.residual_rel * static_cast<double>(n)) {
    throw Error(Errc::LargeResidual, "reconstruction residual " + std::to_string(res));
  }
  return ConvexWeights(std::move(tau));
}

void canonicalize(SignMatrix& s, ConvexWeights& w) {
  if (s.r() != w.size()) throw Error(Errc::ShapeMismatch, "components and weights differ in count");
  IntMatrix m = s.entries();
  for (Index j = 0; j < m.cols(); ++j) {
    if (m(0, j) < 0) m.col(j) = -m.col(j);
  }
  std::vector<Index> order(static_cast<std::size_t>(m.cols()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index x, Index y) {
    if (w[x] != w[y]) return w[x] > w[y];
    return lex_less(m, x, y);
  });
  Vector wv(w.size());
  for (std::size_t j = 0; j < order.size(); ++j) wv(static_cast<Index>(j)) = w[order[j]];
  s = permute_columns(m, order);
  w = ConvexWeights(std::move(wv));
}

SignDecomposition sign_component_decomposition(const CorrelationMatrix& a, Rng& rng,
                                               const ScdOptions& opts) {
  opts.tol.validate();
  const Index n = a.dim();
  ScdDiagnostics diag;
  const Index r = input_rank(a, opts);
  if (r <= 1) return rank_one_case(a, opts, std::move(diag));

  std::vector<IntVector> found;
  Matrix cur = a.mat();
  for (Index pass = 1; pass < r; ++pass) {
    ScdIterationRecord rec;
    rec.iteration = static_cast<int>(pass);
    rec.rank = r - pass + 1;

    SymMatrix p;
    {
      StageTimer timer(diag, "rank");
      try {
        p = orth_projector(orth_basis(SymMatrix(cur, 1e-8), opts.tol));
      } catch (const Error& e) {
        throw DecompositionFailed("rank", e.code(), e.what());
      }
    }

    std::string stage;
    const IntVector s = with_redraws(n, rng, opts, diag, rec, stage, [&](const Vector& g) {
      SdpSolution sol;
      {
        StageTimer timer(diag, "sdp");
        stage = "sdp";
        SdpProblem prob{SymMatrix::outer(g), {}};
        prob.constraints.reserve(static_cast<std::size_t>(n) + 1);
        for (Index j = 0; j < n; ++j) {
          prob.constraints.push_back(SdpConstraint::rank_one(Vector::Unit(n, j), 1.0));
        }
        prob.constraints.push_back(SdpConstraint::dense(p, static_cast<double>(n)));
        sol = solve_sdp(prob, opts.solver);
        ++diag.sdp_solves;
        diag.sdp_iterations += sol.iterations;
        if (sol.status != SdpStatus::Optimal) {
          throw Error(status_error(sol.status),
                      std::string("solver status ") + std::string(to_string(sol.status)));
        }
      }
      StageTimer timer(diag, "extract");
      stage = "extract";
      const IntVector found_s = extract_sign_vector(sol.x_star, opts);
      const double proj = g.dot(found_s.cast<double>());
      rec.vertex_objective = proj * proj;
      rec.sdp_residual = sol.primal_residual;
      rec.sdp_iterations = sol.iterations;
      return found_s;
    });
    found.push_back(s);

    StageTimer timer(diag, "deflate");
    const Deflated d = deflate(cur, s.cast<double>(), opts);
    cur = d.next;
    rec.zeta = d.zeta;
    rec.diag_deviation = (cur.diagonal().array() - 1.0).abs().maxCoeff();
    cur.diagonal().setOnes();
    rec.min_eig = relative_min_eig(cur);
    require_rank(cur, r - pass, opts);
    report(opts, diag, rec);
  }

  {
    StageTimer timer(diag, "extract");
    try {
      found.push_back(extract_sign_vector(SymMatrix(cur, 1e-8), opts));
    } catch (const Error& e) {
      throw DecompositionFailed("final_extract", e.code(), e.what());
    }
  }
  return finish(a, found, opts, std::move(diag));
}

SignDecomposition scd_compressed(const CorrelationMatrix& a, Rng& rng, const ScdOptions& opts) {
  opts.tol.validate();
  const Index n = a.dim();
  ScdDiagnostics diag;
  const Index r = input_rank(a, opts);
  if (r <= 1) return rank_one_case(a, opts, std::move(diag));

  Matrix q;
  Matrix m;
  {
    StageTimer timer(diag, "rank");
    try {
      q = orth_basis(a.sym(), opts.tol);
    } catch (const Error& e) {
      throw DecompositionFailed("rank", e.code(), e.what());
    }
    m = q.transpose() * a.mat() * q;
    m = 0.5 * (m + m.transpose());
  }

  std::vector<IntVector> found;
  for (Index pass = 1; pass < r; ++pass) {
    ScdIterationRecord rec;
    rec.iteration = static_cast<int>(pass);
    const Index k = r - pass + 1;
    rec.rank = k;

    Matrix b;
    {
      StageTimer timer(diag, "rank");
      try {
        b = orth_basis(SymMatrix(m, 1e-8), opts.tol);
      } catch (const Error& e) {
        throw DecompositionFailed("rank", e.code(), e.what());
      }
    }
    const Matrix qb = q * b;  // n x k, orthonormal basis of the current range

    std::vector<SdpConstraint> constraints;
    {
      StageTimer timer(diag, "sdp");
      std::vector<Vector> vecs;
      vecs.reserve(static_cast<std::size_t>(n));
      for (Index j = 0; j < n; ++j) vecs.push_back(svec(SymMatrix::outer(qb.row(j).transpose())));
      const std::vector<std::size_t> sel = rrqr_select(vecs, opts.tol);
      const Index expected = k * (k - 1) / 2 + 1;
      if (static_cast<Index>(sel.size()) != expected) {
        throw DecompositionFailed(
            "constraints", Errc::ConstraintSelectionFailed,
            "selected " + std::to_string(sel.size()) + " constraints, expected " +
                std::to_string(expected));
      }
      if (pass == 1) diag.constraints_selected = static_cast<Index>(sel.size());
      for (std::size_t j : sel) {
        constraints.push_back(
            SdpConstraint::rank_one(qb.row(static_cast<Index>(j)).transpose(), 1.0));
      }
    }

    std::string stage;
    const IntVector s = with_redraws(n, rng, opts, diag, rec, stage, [&](const Vector& g) {
      SdpSolution sol;
      {
        StageTimer timer(diag, "sdp");
        stage = "sdp";
        const Vector gh = qb.transpose() * g;
        sol = solve_sdp(SdpProblem{SymMatrix::outer(gh), constraints}, opts.solver);
        ++diag.sdp_solves;
        diag.sdp_iterations += sol.iterations;
        if (sol.status != SdpStatus::Optimal) {
          throw Error(status_error(sol.status),
                      std::string("solver status ") + std::string(to_string(sol.status)));
        }
      }
      StageTimer timer(diag, "extract");
      stage = "extract";
      const EigDecomposition e = sym_eig(sol.x_star);
      check_rank_one(e.eigenvalues, opts);
      const IntVector found_s =
          round_signs(std::sqrt(e.eigenvalues(0)) * (qb * e.eigenvectors.col(0)), opts);
      check_entries(qb * sol.x_star.mat() * qb.transpose(), found_s, opts);
      const double proj = g.dot(found_s.cast<double>());
      rec.vertex_objective = proj * proj;
      rec.sdp_residual = sol.primal_residual;
      rec.sdp_iterations = sol.iterations;
      return found_s;
    });
    found.push_back(s);

    StageTimer timer(diag, "deflate");
    const Deflated d = deflate(m, q.transpose() * s.cast<double>(), opts);
    m = d.next;
    rec.zeta = d.zeta;
    rec.diag_deviation = ((q * m).cwiseProduct(q).rowwise().sum().array() - 1.0).abs().maxCoeff();
    rec.min_eig = relative_min_eig(m);
    require_rank(m, k - 1, opts);
    report(opts, diag, rec);
  }

  {
    StageTimer timer(diag, "extract");
    try {
      const EigDecomposition e = sym_eig(SymMatrix(m, 1e-8));
      check_rank_one(e.eigenvalues, opts);
      const IntVector s = round_signs(std::sqrt(e.eigenvalues(0)) * (q * e.eigenvectors.col(0)), opts);
      check_entries(q * m * q.transpose(), s, opts);
      found.push_back(s);
    } catch (const Error& e) {
      throw DecompositionFailed("final_extract", e.code(), e.what());
    }
  }
  return finish(a, found, opts, std::move(diag));
}

VerificationReport verify_decomposition(const CorrelationMatrix& a, const SignMatrix& s,
                                        const ConvexWeights& w, const Tolerances& tol) {
  VerificationReport out;
  out.residual = reconstruction_residual(a.mat(), s.real(), w.values());
  out.schur_independent = is_schur_independent_signs(s, tol);
  return out;
}

}  // namespace bincomp
