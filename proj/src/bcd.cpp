#include "bincomp/bcd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace bincomp {

PsdInput::PsdInput(const SymMatrix& h, const Tolerances& tol) : h_(h) {
  if (h.dim() < 1) throw Error(Errc::EmptyInput, "PSD input is empty");
  const Vector lam = eigh(h.mat(), false).values;
  const double top = lam(lam.size() - 1);
  if (lam(0) < -tol.psd_tol * std::max(top, 0.0)) {
    throw Error(Errc::NotPsd, "input has eigenvalue " + std::to_string(lam(0)));
  }
}

SymMatrix centering_projector(Index n) {
  const double inv = 1.0 / static_cast<double>(n);
  return SymMatrix(Matrix::Identity(n, n) - Matrix::Constant(n, n, inv));
}

CorrelationMatrix bcd_to_scd_matrix(const PsdInput& h, const Tolerances& tol) {
  const Index n = h.dim();
  const SymMatrix rp = centering_projector(n);
  const Matrix& r = rp.mat();
  const Matrix g = 4.0 * r * h.mat() * r;
  const Vector y = 0.5 * (Vector::Ones(n) - g.diagonal());
  const Vector e = Vector::Ones(n);
  Matrix a = g + e * y.transpose() + y * e.transpose();
  a.diagonal().setOnes();
  try {
    return CorrelationMatrix(SymMatrix(a), tol);
  } catch (const Error& err) {
    throw Error(Errc::NotPsdAfterReduction, err.what());
  }
}

IntVector resolve_signs(const PsdInput& h, const CorrelationMatrix& a, const SignMatrix& s,
                        const ConvexWeights& w, const Tolerances& tol, SignConstant constant) {
  const Index n = h.dim();
  if (a.dim() != n || s.n() != n || s.r() != w.size()) {
    throw Error(Errc::ShapeMismatch, "resolve_signs: shapes disagree");
  }
  const double nn = static_cast<double>(n);
  const double c = constant == SignConstant::TwoTrace ? 2.0 * h.mat().trace()
                                                      : 2.0 * nn * h.mat().trace();
  const Vector e = Vector::Ones(n);
  const Vector rhs = (4.0 * h.mat() - a.mat()) * e - c * e;
  const Matrix k = nn * s.real() * w.values().asDiagonal();
  const Vector xi = k.colPivHouseholderQr().solve(rhs);

  IntVector out(xi.size());
  for (Index i = 0; i < xi.size(); ++i) {
    if (std::abs(std::abs(xi(i)) - 1.0) > tol.round_tol) {
      throw Error(Errc::SignResolutionFailed,
                  "xi_" + std::to_string(i) + " = " + std::to_string(xi(i)) + " is not near +/-1");
    }
    out(i) = xi(i) > 0.0 ? 1 : -1;
  }
  const double res = (k * out.cast<double>() - rhs).norm();
  if (res > 1e-6 * nn) {
    throw Error(Errc::SignResolutionFailed, "rounded sign system residual " + std::to_string(res));
  }
  return out;
}

void canonicalize(BinaryMatrix& z, ConvexWeights& w) {
  if (z.r() != w.size()) throw Error(Errc::ShapeMismatch, "components and weights differ in count");
  const IntMatrix& m = z.entries();
  std::vector<Index> order(static_cast<std::size_t>(m.cols()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index x, Index y) {
    if (w[x] != w[y]) return w[x] > w[y];
    for (Index i = 0; i < m.rows(); ++i) {
      if (m(i, x) != m(i, y)) return m(i, x) < m(i, y);
    }
    return false;
  });
  IntMatrix out(m.rows(), m.cols());
  Vector wv(w.size());
  for (std::size_t j = 0; j < order.size(); ++j) {
    out.col(static_cast<Index>(j)) = m.col(order[j]);
    wv(static_cast<Index>(j)) = w[order[j]];
  }
  z = BinaryMatrix(std::move(out));
  w = ConvexWeights(std::move(wv));
}

BinaryDecomposition binary_component_decomposition(const PsdInput& h, Rng& rng,
                                                   const BcdOptions& opts) {
  const Index n = h.dim();
  const Tolerances& tol = opts.scd.tol;

  CorrelationMatrix a = [&] {
    try {
      return bcd_to_scd_matrix(h, tol);
    } catch (const Error& e) {
      throw DecompositionFailed("reduction", e.code(), e.what());
    }
  }();

  SignDecomposition d = opts.compressed ? scd_compressed(a, rng, opts.scd)
                                        : sign_component_decomposition(a, rng, opts.scd);

  IntVector xi;
  try {
    xi = resolve_signs(h, a, d.components, d.weights, tol);
  } catch (const Error& e) {
    throw DecompositionFailed("resolve_signs", e.code(), e.what());
  }

  IntMatrix z(n, d.components.r());
  for (Index j = 0; j < z.cols(); ++j) {
    z.col(j) = sign_to_binary(xi(j) * d.components.col(j));
  }
  BinaryDecomposition out;
  out.components = BinaryMatrix(std::move(z));
  out.weights = d.weights;
  out.residual_fro =
      reconstruction_residual(h.mat(), out.components.real(), out.weights.values());
  if (out.residual_fro > opts.scd.residual_rel * static_cast<double>(n)) {
    throw DecompositionFailed("residual", Errc::LargeResidual,
                              "binary reconstruction residual " + std::to_string(out.residual_fro));
  }
  out.schur_certificate = is_schur_independent_binary(out.components, tol);
  if (opts.require_certificate && !out.schur_certificate) {
    throw DecompositionFailed("certificate", Errc::NotSchurIndependent,
                              "recovered binary family is not Schur independent");
  }
  canonicalize(out.components, out.weights);
  out.diagnostics = std::move(d.diagnostics);
  return out;
}

}  // namespace bincomp
