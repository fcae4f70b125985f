#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bincomp {

enum class Errc {
  NonFinite,
  NotPsd,
  NotOrthonormal,
  NotSymmetric,
  EmptyInput,
  ShapeMismatch,
  RankTooLarge,
  GenerationFailed,
  Infeasible,
  MaxIterations,
  NumericalBreakdown,
  RangeMismatch,
  RankDegenerate,
  NoFiniteBound,
  NotRankOne,
  RoundingFailed,
  NotInOpenSimplex,
  LargeResidual,
  NotCorrelation,
  ConstraintSelectionFailed,
  DecompositionFailed,
  NotPsdAfterReduction,
  SignResolutionFailed,
  NoEigengap,
  DiagonalNotConstant,
  UnmatchedComponent,
  NotSchurIndependent,
  ParseError,
};

std::string_view to_string(Errc code) noexcept;

/// Base exception for every structured failure in the library.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by the decomposition pipelines when the input violates the
/// recoverability hypothesis. Carries the pipeline stage that gave up and the
/// underlying error code.
class DecompositionFailed : public Error {
 public:
  DecompositionFailed(std::string stage, Errc cause, const std::string& detail)
      : Error(Errc::DecompositionFailed,
              "decomposition failed at stage '" + stage + "' (" +
                  std::string(to_string(cause)) + "): " + detail),
        stage_(std::move(stage)),
        cause_(cause) {}

  const std::string& stage() const noexcept { return stage_; }
  Errc cause() const noexcept { return cause_; }

 private:
  std::string stage_;
  Errc cause_;
};

}  // namespace bincomp
