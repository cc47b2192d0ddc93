#pragma once

#include <functional>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "qipm/lp_core.hpp"

namespace qipm {

enum class SystemKind { augmented, normal_equations };

/// Dense symmetric system matrix.
///
/// `augmented` systems have the saddle-point layout [[D, B^T], [B, 0]] with D
/// diagonal and positive; `leading` is the order of D. They are symmetric
/// quasi-definite, hence indefinite with exactly rows(B) negative eigenvalues.
/// `normal_equations` systems are symmetric positive definite.
class SymmetricSystem {
 public:
  /// Throws std::invalid_argument unless `matrix` is exactly symmetric and,
  /// for augmented systems, has the saddle-point layout described above.
  SymmetricSystem(MatrixXd matrix, SystemKind kind, Index leading = 0);

  static SymmetricSystem augmented(const VectorXd& leading_diagonal, const MatrixXd& lower_left);
  static SymmetricSystem normal_equations(MatrixXd matrix);

  const MatrixXd& matrix() const { return matrix_; }
  SystemKind kind() const { return kind_; }
  Index order() const { return matrix_.rows(); }
  Index leading() const { return leading_; }

 private:
  MatrixXd matrix_;
  SystemKind kind_;
  Index leading_;
};

/// Symmetric factorization reused across many right-hand sides.
///
/// Augmented systems are factored as
///   [[D, B^T], [B, 0]] = [[I, 0], [B D^-1, I]] diag(D, -C) [[I, D^-1 B^T], [0, I]]
/// with C = B D^-1 B^T factored by Cholesky; normal equations by Cholesky.
/// A Cholesky pivot below 1e-14 times the largest diagonal of the factored
/// block raises SingularMatrixError.
class SymmetricFactorization {
 public:
  explicit SymmetricFactorization(const SymmetricSystem& sys);

  VectorXd solve(const VectorXd& rhs) const;
  const SymmetricSystem& system() const { return sys_; }

 private:
  SymmetricSystem sys_;
  VectorXd inv_leading_;  // D^-1 (augmented only)
  MatrixXd lower_left_;   // B (augmented only)
  Eigen::LLT<MatrixXd> cholesky_;
};

/// Direct solve; polishes with up to two steps of classical iterative
/// refinement so that ||M z - rhs|| <= 1e-12 ||rhs|| whenever the conditioning
/// allows it.
VectorXd exact_solve(const SymmetricSystem& sys, const VectorXd& rhs);

struct CgResult {
  VectorXd solution;
  int matvecs = 0;
  int iterations = 0;
};

using LinearOperator = std::function<VectorXd(const VectorXd&)>;

/// Conjugate gradients to ||M z - rhs|| <= tol ||rhs||. Throws
/// NonConvergenceError (carrying the best iterate) once `max_iterations`
/// (default 50 * dimension) is exceeded.
CgResult cg_solve(const SymmetricSystem& sys, const VectorXd& rhs, double tol,
                  int max_iterations = 0);
CgResult cg_solve(const LinearOperator& apply, const VectorXd& rhs, double tol,
                  int max_iterations = 0);

inline constexpr Index kConditionNumberCap = 2048;

/// sigma_max / sigma_min, +infinity for an exactly singular matrix. For a
/// symmetric matrix the singular values are the absolute eigenvalues, so a
/// symmetric eigensolve is used instead of a general SVD.
double condition_number(const SymmetricSystem& sys, Index cap = kConditionNumberCap);
double condition_number(const MatrixXd& symmetric_matrix, Index cap = kConditionNumberCap);

}  // namespace qipm
