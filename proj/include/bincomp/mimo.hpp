#pragma once

// Stylized activity detection: every device owns a sign pilot, the base
// station sees the covariance of the superposed pilots and recovers the
// active set from its sign component decomposition.

#include <optional>
#include <vector>

#include "bincomp/scd.hpp"

namespace bincomp {

/// ceil(log2 N) + 1
Index pilot_length(Index devices);

struct PilotCodebook {
  Index devices = 0;
  Index n = 0;
  SignMatrix pilots;  // n x devices, first entry of every pilot is +1
};

/// Distinct +/- classes drawn without replacement from the 2^(n-1) sign
/// vectors with leading +1. Requires devices >= 2.
PilotCodebook assign_pilots(Index devices, Rng& rng);

struct ChannelScene {
  std::vector<Index> active;   // ascending device indices
  std::vector<double> fading;  // tau_k > 0, aligned with `active`
  double noise = 0.0;          // epsilon
  /// Number of antenna snapshots; nullopt means the exact covariance.
  std::optional<Index> antennas;
};

/// `count` devices drawn without replacement, fading uniform on [0.5, 2].
ChannelScene random_scene(const PilotCodebook& cb, Index count, double noise,
                          std::optional<Index> antennas, Rng& rng);

enum class CovarianceMode { Exact, Empirical };

struct CovarianceObservation {
  SymMatrix y;
  CovarianceMode mode = CovarianceMode::Exact;
};

/// Exact: sum tau_k s_k s_k^t + eps I. Empirical: M^{-1} sum_i y_i y_i^t with
/// y_i = sum_k sqrt(tau_k) h_ki s_k + sqrt(eps) w_i, h and w standard normal.
CovarianceObservation simulate_covariance(const PilotCodebook& cb, const ChannelScene& scene,
                                          Rng& rng);

struct Denoised {
  CorrelationMatrix y_norm;
  double scale = 0.0;
  double noise = 0.0;
  Index rank = 0;
};

struct DenoiseOptions {
  double min_gap_ratio = 10.0;
  double exact_diag_tol = 1e-10;
  double empirical_diag_tol = 1e-2;
};

/// The largest ratio of consecutive eigenvalues (clamped below at
/// 1e-12 lambda_1) picks the signal rank r; the noise floor is the mean of
/// the remaining eigenvalues. Y - eps I is projected on the top-r eigenspace,
/// scale is its mean diagonal, and the result is rescaled by its diagonal to
/// a correlation matrix. Throws NoEigengap (best ratio below min_gap_ratio)
/// and DiagonalNotConstant (diag / scale off e by more than the mode's
/// tolerance).
Denoised denoise_and_normalize(const CovarianceObservation& obs, const Tolerances& tol = {},
                               const DenoiseOptions& opts = {});

struct DetectionReport {
  std::vector<Index> detected;       // ascending
  std::vector<double> fading_est;    // aligned with `detected`
  std::vector<IntVector> unmatched;  // recovered signs with no pilot
  bool schur_certificate = false;
  SignDecomposition decomposition;
};

/// Compressed decomposition of y_norm, then exact codebook lookup of every
/// component up to sign. Throws UnmatchedComponent, NotSchurIndependent, or
/// DecompositionFailed.
DetectionReport detect_active(const CorrelationMatrix& y_norm, double scale,
                              const PilotCodebook& cb, Rng& rng, const ScdOptions& opts = {});

/// Looser thresholds for covariances estimated from finitely many snapshots.
ScdOptions empirical_options();

}  // namespace bincomp
