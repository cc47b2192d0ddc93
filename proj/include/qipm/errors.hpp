#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace qipm {

/// Root of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- instance data ---------------------------------------------------------

class DimensionError : public Error {
 public:
  using Error::Error;
};

class RankDeficientError : public Error {
 public:
  using Error::Error;
};

class MalformedInstanceError : public Error {
 public:
  using Error::Error;
};

class NonIntegerDataError : public Error {
 public:
  using Error::Error;
};

// --- linear algebra ----------------------------------------------------------

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, Eigen::VectorXd best)
      : Error(what), best_iterate(std::move(best)) {}
  Eigen::VectorXd best_iterate;
};

/// Iterative refinement stopped contracting. Carries the κ·ε product that
/// the noise channel was operating at.
class DivergingSolverError : public Error {
 public:
  DivergingSolverError(const std::string& what, double kappa_eps)
      : Error(what), kappa_eps_product(kappa_eps) {}
  double kappa_eps_product;
};

// --- interior point ------------------------------------------------------------

class InteriorViolationError : public Error {
 public:
  using Error::Error;
};

class CentralityLossError : public Error {
 public:
  CentralityLossError(const std::string& what, std::vector<double> deltas)
      : Error(what), delta_history(std::move(deltas)) {}
  std::vector<double> delta_history;
};

class CenteringFailureError : public Error {
 public:
  CenteringFailureError(const std::string& what, std::vector<double> deltas)
      : Error(what), delta_history(std::move(deltas)) {}
  std::vector<double> delta_history;
};

class CannotRefineError : public Error {
 public:
  using Error::Error;
};

class StageFailureError : public Error {
 public:
  StageFailureError(const std::string& what, int stage_index)
      : Error(what), stage(stage_index) {}
  int stage;
};

class WrongPartitionError : public Error {
 public:
  using Error::Error;
};

}  // namespace qipm
