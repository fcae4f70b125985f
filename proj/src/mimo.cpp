#include "bincomp/mimo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

namespace bincomp {

Index pilot_length(Index devices) {
  if (devices < 2) throw std::invalid_argument("pilot_length: need at least two devices");
  // ceil(log2 N) = bit_width(N - 1) for N >= 2.
  return static_cast<Index>(std::bit_width(static_cast<std::uint64_t>(devices - 1))) + 1;
}

namespace {

/// Entries 1..n-1 of a pilot with leading +1, read as bits (+1 -> 1).
std::uint64_t pilot_code(const IntVector& s) {
  std::uint64_t code = 0;
  for (Index i = 1; i < s.size(); ++i) {
    code = (code << 1) | (s(i) > 0 ? 1u : 0u);
  }
  return code;
}

/// First k entries of a uniformly random permutation of 0..size-1.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t size, std::uint64_t k,
                                                      Rng& rng) {
  std::vector<std::uint64_t> pool(static_cast<std::size_t>(size));
  std::iota(pool.begin(), pool.end(), std::uint64_t{0});
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t j = i + rng.below(size - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

}  // namespace

PilotCodebook assign_pilots(Index devices, Rng& rng) {
  PilotCodebook cb;
  cb.devices = devices;
  cb.n = pilot_length(devices);
  if (cb.n > 40) throw std::invalid_argument("assign_pilots: too many devices");
  const std::uint64_t classes = std::uint64_t{1} << (cb.n - 1);
  const auto codes = sample_without_replacement(classes, static_cast<std::uint64_t>(devices), rng);
  IntMatrix p(cb.n, devices);
  for (Index d = 0; d < devices; ++d) {
    p(0, d) = 1;
    for (Index i = 1; i < cb.n; ++i) {
      const auto bit = (codes[static_cast<std::size_t>(d)] >> (cb.n - 1 - i)) & 1u;
      p(i, d) = bit ? 1 : -1;
    }
  }
  cb.pilots = SignMatrix(std::move(p));
  return cb;
}

ChannelScene random_scene(const PilotCodebook& cb, Index count, double noise,
                          std::optional<Index> antennas, Rng& rng) {
  if (count < 0 || count > cb.devices) throw std::invalid_argument("random_scene: bad active count");
  if (noise < 0.0) throw std::invalid_argument("random_scene: negative noise");
  if (antennas && *antennas < 1) throw std::invalid_argument("random_scene: antennas must be >= 1");
  ChannelScene scene;
  for (std::uint64_t d : sample_without_replacement(static_cast<std::uint64_t>(cb.devices),
                                                    static_cast<std::uint64_t>(count), rng)) {
    scene.active.push_back(static_cast<Index>(d));
  }
  std::sort(scene.active.begin(), scene.active.end());
  for (std::size_t k = 0; k < scene.active.size(); ++k) {
    scene.fading.push_back(0.5 + 1.5 * rng.uniform());
  }
  scene.noise = noise;
  scene.antennas = antennas;
  return scene;
}

CovarianceObservation simulate_covariance(const PilotCodebook& cb, const ChannelScene& scene,
                                          Rng& rng) {
  if (scene.active.size() != scene.fading.size()) {
    throw std::invalid_argument("simulate_covariance: fading and active set differ in size");
  }
  const Index n = cb.n;
  const auto k = static_cast<Index>(scene.active.size());
  Matrix s(n, k);
  Vector tau(k);
  for (Index j = 0; j < k; ++j) {
    s.col(j) = cb.pilots.col(scene.active[static_cast<std::size_t>(j)]).cast<double>();
    tau(j) = scene.fading[static_cast<std::size_t>(j)];
  }
  CovarianceObservation obs;
  if (!scene.antennas) {
    obs.mode = CovarianceMode::Exact;
    obs.y = SymMatrix(s * tau.asDiagonal() * s.transpose() +
                      scene.noise * Matrix::Identity(n, n));
    return obs;
  }
  const Index m = *scene.antennas;
  Matrix h(k, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < k; ++j) h(j, i) = rng.normal();
  }
  Matrix w(n, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) w(j, i) = rng.normal();
  }
  const Matrix y = s * tau.cwiseSqrt().asDiagonal() * h + std::sqrt(scene.noise) * w;
  obs.mode = CovarianceMode::Empirical;
  obs.y = SymMatrix((y * y.transpose()) / static_cast<double>(m), 1e-8);
  return obs;
}

Denoised denoise_and_normalize(const CovarianceObservation& obs, const Tolerances& tol,
                               const DenoiseOptions& opts) {
  const Index n = obs.y.dim();
  const EigDecomposition eig = sym_eig(obs.y);
  const Vector& lam = eig.eigenvalues;
  if (!(lam(0) > 0.0) || n < 2) throw Error(Errc::NoEigengap, "covariance has no signal");
  const double floor = 1e-12 * lam(0);
  Index r = 0;
  double best = 0.0;
  for (Index i = 0; i + 1 < n; ++i) {
    const double ratio = std::max(lam(i), floor) / std::max(lam(i + 1), floor);
    if (ratio > best) {
      best = ratio;
      r = i + 1;
    }
  }
  if (best < opts.min_gap_ratio) {
    throw Error(Errc::NoEigengap, "largest eigenvalue ratio " + std::to_string(best) + " < " +
                                      std::to_string(opts.min_gap_ratio));
  }
  const double eps = lam.tail(n - r).mean();
  const Matrix v = eig.eigenvectors.leftCols(r);
  const Vector signal = (lam.head(r).array() - eps).matrix();
  Matrix ybar = v * signal.asDiagonal() * v.transpose();
  ybar = 0.5 * (ybar + ybar.transpose());
  const double scale = ybar.diagonal().mean();
  if (!(scale > 0.0)) throw Error(Errc::NoEigengap, "signal part has no positive diagonal");
  const double snap =
      obs.mode == CovarianceMode::Exact ? opts.exact_diag_tol : opts.empirical_diag_tol;
  const double dev = (ybar.diagonal().array() / scale - 1.0).abs().maxCoeff();
  if (dev > snap) {
    throw Error(Errc::DiagonalNotConstant,
                "diagonal deviates from its mean by " + std::to_string(dev) + " (relative)");
  }
  // D^{-1/2} Ybar D^{-1/2} sets the diagonal to e without leaving the psd cone.
  const Vector dinv = ybar.diagonal().cwiseSqrt().cwiseInverse();
  Matrix normed = dinv.asDiagonal() * ybar * dinv.asDiagonal();
  normed.diagonal().setOnes();
  return Denoised{CorrelationMatrix(SymMatrix(normed, 1e-8), tol), scale, eps, r};
}

DetectionReport detect_active(const CorrelationMatrix& y_norm, double scale,
                              const PilotCodebook& cb, Rng& rng, const ScdOptions& opts) {
  if (y_norm.dim() != cb.n) throw Error(Errc::ShapeMismatch, "observation size differs from pilot length");
  std::unordered_map<std::uint64_t, Index> lookup;
  for (Index d = 0; d < cb.devices; ++d) lookup.emplace(pilot_code(cb.pilots.col(d)), d);

  DetectionReport report;
  report.decomposition = scd_compressed(y_norm, rng, opts);
  const SignDecomposition& dec = report.decomposition;
  report.schur_certificate = is_schur_independent_signs(dec.components, opts.tol);

  std::vector<std::pair<Index, double>> hits;
  for (Index j = 0; j < dec.components.r(); ++j) {
    const IntVector s = dec.components.col(j);  // canonical: s(0) = +1
    const auto it = lookup.find(pilot_code(s));
    if (it == lookup.end() || cb.pilots.col(it->second) != s) {
      report.unmatched.push_back(s);
      continue;
    }
    hits.emplace_back(it->second, scale * dec.weights[j]);
  }
  std::sort(hits.begin(), hits.end());
  for (const auto& [device, fading] : hits) {
    report.detected.push_back(device);
    report.fading_est.push_back(fading);
  }
  if (!report.unmatched.empty()) {
    throw Error(Errc::UnmatchedComponent, std::to_string(report.unmatched.size()) +
                                              " recovered component(s) match no pilot");
  }
  if (!report.schur_certificate) {
    throw DecompositionFailed("certificate", Errc::NotSchurIndependent,
                              "recovered pilots are not Schur independent");
  }
  return report;
}

ScdOptions empirical_options() {
  ScdOptions o;
  o.tol.rank_rel_tol = 1e-3;
  o.tol.round_tol = 0.5;
  o.rank_one_ratio = 0.2;
  o.max_entry_error = 0.75;
  o.residual_rel = 0.1;
  return o;
}

}  // namespace bincomp
