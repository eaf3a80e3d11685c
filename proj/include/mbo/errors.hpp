#pragma once

#include <stdexcept>
#include <string>

namespace mbo {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotSymmetric : Error {
  NotSymmetric() : Error("surface tension matrix is not symmetric") {}
};

struct NonzeroDiagonal : Error {
  NonzeroDiagonal() : Error("surface tension matrix has a nonzero diagonal entry") {}
};

struct NonpositiveOffDiagonal : Error {
  NonpositiveOffDiagonal() : Error("surface tension matrix has a nonpositive off-diagonal entry") {}
};

struct TriangleInequalityViolated : Error {
  int i, j, k;
  TriangleInequalityViolated(int i_, int j_, int k_)
      : Error("strict triangle inequality violated: sigma(" + std::to_string(i_) + "," +
              std::to_string(j_) + ") >= sigma(" + std::to_string(i_) + "," + std::to_string(k_) +
              ") + sigma(" + std::to_string(k_) + "," + std::to_string(j_) + ")"),
        i(i_), j(j_), k(k_) {}
};

struct NotConditionallyNegativeDefinite : Error {
  NotConditionallyNegativeDefinite()
      : Error("surface tension matrix is not conditionally negative-definite") {}
};

struct NoSolution : Error {
  NoSolution() : Error("no junction angle triple solves the sine relation") {}
};

struct NonpositiveVariance : Error {
  NonpositiveVariance() : Error("convolution variance must be positive") {}
};

struct GridMismatch : Error {
  GridMismatch() : Error("operands live on different grids or phase counts") {}
};

struct PhaseOutOfRange : Error {
  explicit PhaseOutOfRange(int i) : Error("phase index out of range: " + std::to_string(i)) {}
};

struct TooLargeForBruteForce : Error {
  TooLargeForBruteForce() : Error("instance too large for exhaustive minimization") {}
};

struct UnresolvedScale : Error {
  explicit UnresolvedScale(const std::string& what) : Error("unresolved scale: " + what) {}
};

struct NotATripleJunction : Error {
  explicit NotATripleJunction(int phases_seen)
      : Error("annulus does not contain exactly three phases (saw " +
              std::to_string(phases_seen) + ")") {}
};

struct ParseError : Error {
  int line;
  ParseError(int line_, const std::string& what)
      : Error("parse error at line " + std::to_string(line_) + ": " + what), line(line_) {}
};

struct ValidationError : Error {
  std::string field;
  ValidationError(const std::string& field_, const std::string& reason)
      : Error("invalid config field '" + field_ + "': " + reason), field(field_) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error("io error: " + what) {}
};

}  // namespace mbo
