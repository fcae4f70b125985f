#include "bincomp/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bincomp {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NonFinite: return "NonFinite";
    case Errc::NotPsd: return "NotPsd";
    case Errc::NotOrthonormal: return "NotOrthonormal";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::RankTooLarge: return "RankTooLarge";
    case Errc::GenerationFailed: return "GenerationFailed";
    case Errc::Infeasible: return "Infeasible";
    case Errc::MaxIterations: return "MaxIterations";
    case Errc::NumericalBreakdown: return "NumericalBreakdown";
    case Errc::RangeMismatch: return "RangeMismatch";
    case Errc::RankDegenerate: return "RankDegenerate";
    case Errc::NoFiniteBound: return "NoFiniteBound";
    case Errc::NotRankOne: return "NotRankOne";
    case Errc::RoundingFailed: return "RoundingFailed";
    case Errc::NotInOpenSimplex: return "NotInOpenSimplex";
    case Errc::LargeResidual: return "LargeResidual";
    case Errc::NotCorrelation: return "NotCorrelation";
    case Errc::ConstraintSelectionFailed: return "ConstraintSelectionFailed";
    case Errc::DecompositionFailed: return "DecompositionFailed";
    case Errc::NotPsdAfterReduction: return "NotPsdAfterReduction";
    case Errc::SignResolutionFailed: return "SignResolutionFailed";
    case Errc::NoEigengap: return "NoEigengap";
    case Errc::DiagonalNotConstant: return "DiagonalNotConstant";
    case Errc::UnmatchedComponent: return "UnmatchedComponent";
    case Errc::NotSchurIndependent: return "NotSchurIndependent";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

void Tolerances::validate() const {
  for (double v : {rank_rel_tol, psd_tol, round_tol}) {
    if (!(v > 0.0 && v < 1.0)) {
      throw std::invalid_argument("tolerances must lie in (0, 1)");
    }
  }
}

SymMatrix::SymMatrix(const Matrix& x, double asym_tol) {
  if (x.rows() != x.cols()) {
    throw Error(Errc::ShapeMismatch, "symmetric matrix must be square");
  }
  if (!x.allFinite()) {
    throw Error(Errc::NonFinite, "matrix contains NaN or Inf");
  }
  if (x.size() > 0) {
    const double scale = x.cwiseAbs().maxCoeff();
    const double asym = (x - x.transpose()).cwiseAbs().maxCoeff();
    if (asym > asym_tol * scale) {
      throw Error(Errc::NotSymmetric, "matrix asymmetry " + std::to_string(asym) +
                                          " exceeds tolerance");
    }
  }
  data_ = 0.5 * (x + x.transpose());
}

SymMatrix SymMatrix::zero(Index n) { return SymMatrix(Matrix::Zero(n, n)); }

SymMatrix SymMatrix::identity(Index n) {
  return SymMatrix(Matrix::Identity(n, n));
}

SymMatrix SymMatrix::outer(const Vector& a) {
  return SymMatrix(a * a.transpose());
}

Spectrum eigh(const Matrix& x, bool with_vectors) {
  if (!x.allFinite()) throw Error(Errc::NonFinite, "eigh: non-finite input");
  Spectrum out;
  if (x.size() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      x, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() == Eigen::Success) {
    out.values = es.eigenvalues();
    if (with_vectors) out.vectors = es.eigenvectors();
    return out;
  }
  const Index n = x.rows();
  const double shift = x.norm() + 1.0;
  const Matrix shifted = 0.5 * (x + x.transpose()) + shift * Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(shifted, Eigen::ComputeFullU);
  // Singular values come in decreasing order.
  out.values = (svd.singularValues().array() - shift).matrix().reverse();
  if (with_vectors) out.vectors = svd.matrixU().rowwise().reverse();
  return out;
}

EigDecomposition sym_eig(const SymMatrix& x) {
  if (!x.is_finite()) throw Error(Errc::NonFinite, "sym_eig: non-finite input");
  const Index n = x.dim();
  const Spectrum sp = eigh(x.mat());
  EigDecomposition out;
  out.eigenvalues = sp.values.reverse();
  out.eigenvectors = sp.vectors.rowwise().reverse();
  for (Index j = 0; j < n; ++j) {
    auto v = out.eigenvectors.col(j);
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) > best) {
        best = std::abs(v(i));
        arg = i;
      }
    }
    if (v(arg) < 0.0) v = -v;
  }
  return out;
}

namespace {

Index rank_from_spectrum(const Vector& lambda, double rel_tol) {
  if (lambda.size() == 0) return 0;
  const double top = lambda.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda(i)) > rel_tol * top) ++r;
  }
  return r;
}

}  // namespace

Index numerical_rank(const SymMatrix& x, const Tolerances& tol) {
  if (!x.is_finite()) throw Error(Errc::NonFinite, "numerical_rank: non-finite input");
  return rank_from_spectrum(eigh(x.mat(), false).values, tol.rank_rel_tol);
}

Matrix orth_basis(const SymMatrix& x, const Tolerances& tol) {
  const EigDecomposition eig = sym_eig(x);
  const Index n = x.dim();
  if (n == 0) return Matrix(0, 0);
  const double top = eig.eigenvalues.cwiseAbs().maxCoeff();
  const double lo = eig.eigenvalues(n - 1);
  if (lo < -tol.psd_tol * top) {
    throw Error(Errc::NotPsd, "orth_basis: eigenvalue " + std::to_string(lo) +
                                  " below -psd_tol * lambda_max");
  }
  const Index r = rank_from_spectrum(eig.eigenvalues, tol.rank_rel_tol);
  return eig.eigenvectors.leftCols(r);
}

SymMatrix orth_projector(const Matrix& q) {
  const Matrix gram = q.transpose() * q;
  const double dev =
      gram.size() == 0
          ? 0.0
          : (gram - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
  if (!(dev <= 1e-8)) {
    throw Error(Errc::NotOrthonormal, "orth_projector: columns are not orthonormal");
  }
  return SymMatrix(q * q.transpose());
}

Vector svec(const SymMatrix& x) {
  const Index n = x.dim();
  Vector v(n * (n + 1) / 2);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) v(k++) = M_SQRT2 * x(i, j);
    v(k++) = x(j, j);
  }
  return v;
}

SymMatrix smat(const Vector& v) {
  // n(n+1)/2 = len
  const auto len = v.size();
  Index n = 0;
  while (n * (n + 1) / 2 < len) ++n;
  if (n * (n + 1) / 2 != len) {
    throw Error(Errc::ShapeMismatch, "smat: length is not triangular");
  }
  Matrix x(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      const double off = v(k++) / M_SQRT2;
      x(i, j) = off;
      x(j, i) = off;
    }
    x(j, j) = v(k++);
  }
  return SymMatrix(x, 0.0);
}

std::vector<std::size_t> rrqr_select(std::span<const Vector> vectors,
                                     const Tolerances& tol) {
  if (vectors.empty()) throw Error(Errc::EmptyInput, "rrqr_select: no vectors");
  const Index d = vectors.front().size();
  Matrix stacked(d, static_cast<Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (vectors[j].size() != d) {
      throw Error(Errc::ShapeMismatch, "rrqr_select: vectors differ in length");
    }
    stacked.col(static_cast<Index>(j)) = vectors[j];
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(stacked.rows(), stacked.cols());
  qr.setThreshold(tol.rank_rel_tol);
  qr.compute(stacked);
  const Index rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  std::vector<std::size_t> picked;
  picked.reserve(static_cast<std::size_t>(rank));
  for (Index k = 0; k < rank; ++k) picked.push_back(static_cast<std::size_t>(perm(k)));
  std::sort(picked.begin(), picked.end());
  return picked;
}

double min_eigenvalue(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  return eigh(x, false).values(0);
}

}  // namespace bincomp
