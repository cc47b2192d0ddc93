#include "qipm/dense_la.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "qipm/errors.hpp"

namespace qipm {

namespace {

constexpr double kPivotTolerance = 1e-14;

void check_pivots(const Eigen::LLT<MatrixXd>& llt, const MatrixXd& factored, const char* what) {
  const double scale = factored.diagonal().cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError(std::string(what) + ": factorization broke down");
  }
  const MatrixXd& L = llt.matrixLLT();
  for (Index i = 0; i < L.rows(); ++i) {
    const double pivot = L(i, i) * L(i, i);
    if (!(pivot > kPivotTolerance * scale)) {
      std::ostringstream os;
      os << what << ": pivot " << pivot << " at " << i << " below " << kPivotTolerance
         << " * " << scale;
      throw SingularMatrixError(os.str());
    }
  }
}

}  // namespace

SymmetricSystem::SymmetricSystem(MatrixXd matrix, SystemKind kind, Index leading)
    : matrix_(std::move(matrix)), kind_(kind), leading_(leading) {
  if (matrix_.rows() != matrix_.cols()) {
    throw std::invalid_argument("SymmetricSystem: matrix must be square");
  }
  if (matrix_ != matrix_.transpose()) {
    throw std::invalid_argument("SymmetricSystem: matrix is not exactly symmetric");
  }
  if (kind_ == SystemKind::augmented) {
    if (leading_ <= 0 || leading_ > matrix_.rows()) {
      throw std::invalid_argument("SymmetricSystem: augmented system needs a leading block");
    }
    const Index lead = leading_;
    const Index rest = matrix_.rows() - lead;
    const MatrixXd top = matrix_.topLeftCorner(lead, lead);
    if (!top.isDiagonal(0.0) || (top.diagonal().array() <= 0.0).any()) {
      throw std::invalid_argument("SymmetricSystem: leading block must be positive diagonal");
    }
    if (rest > 0 && !matrix_.bottomRightCorner(rest, rest).isZero(0.0)) {
      throw std::invalid_argument("SymmetricSystem: trailing block must be zero");
    }
  } else {
    leading_ = 0;
  }
}

SymmetricSystem SymmetricSystem::augmented(const VectorXd& leading_diagonal,
                                           const MatrixXd& lower_left) {
  const Index lead = leading_diagonal.size();
  const Index rest = lower_left.rows();
  if (lower_left.cols() != lead) {
    throw std::invalid_argument("SymmetricSystem::augmented: block shapes disagree");
  }
  MatrixXd M = MatrixXd::Zero(lead + rest, lead + rest);
  M.topLeftCorner(lead, lead) = leading_diagonal.asDiagonal();
  M.bottomLeftCorner(rest, lead) = lower_left;
  M.topRightCorner(lead, rest) = lower_left.transpose();
  return SymmetricSystem(std::move(M), SystemKind::augmented, lead);
}

SymmetricSystem SymmetricSystem::normal_equations(MatrixXd matrix) {
  return SymmetricSystem(std::move(matrix), SystemKind::normal_equations);
}

SymmetricFactorization::SymmetricFactorization(const SymmetricSystem& sys) : sys_(sys) {
  const MatrixXd& M = sys.matrix();
  if (sys.kind() == SystemKind::normal_equations) {
    cholesky_.compute(M);
    check_pivots(cholesky_, M, "exact_solve (normal equations)");
    return;
  }
  const Index lead = sys.leading();
  const Index rest = M.rows() - lead;
  inv_leading_ = M.diagonal().head(lead).cwiseInverse();
  lower_left_ = M.bottomLeftCorner(rest, lead);
  if (rest > 0) {
    const MatrixXd scaled = lower_left_ * inv_leading_.cwiseSqrt().asDiagonal();
    const MatrixXd schur = scaled * scaled.transpose();
    cholesky_.compute(schur);
    check_pivots(cholesky_, schur, "exact_solve (augmented Schur complement)");
  }
}

VectorXd SymmetricFactorization::solve(const VectorXd& rhs) const {
  const MatrixXd& M = sys_.matrix();
  if (rhs.size() != M.rows()) throw DimensionError("exact_solve: rhs has wrong length");
  if (sys_.kind() == SystemKind::normal_equations) return cholesky_.solve(rhs);

  const Index lead = sys_.leading();
  const Index rest = M.rows() - lead;
  const VectorXd f = rhs.head(lead);
  VectorXd out(M.rows());
  if (rest == 0) {
    out = inv_leading_.cwiseProduct(f);
    return out;
  }
  const VectorXd g = rhs.tail(rest);
  // D u + B^T v = f,  B u = g  =>  C v = B D^-1 f - g,  u = D^-1 (f - B^T v)
  const VectorXd v = cholesky_.solve(lower_left_ * inv_leading_.cwiseProduct(f) - g);
  out.head(lead) = inv_leading_.cwiseProduct(f - lower_left_.transpose() * v);
  out.tail(rest) = v;
  return out;
}

VectorXd exact_solve(const SymmetricSystem& sys, const VectorXd& rhs) {
  const SymmetricFactorization factor(sys);
  VectorXd z = factor.solve(rhs);
  const double target = 1e-12 * rhs.norm();
  for (int pass = 0; pass < 2; ++pass) {
    const VectorXd r = rhs - sys.matrix() * z;
    if (r.norm() <= target) break;
    z += factor.solve(r);
  }
  return z;
}

CgResult cg_solve(const SymmetricSystem& sys, const VectorXd& rhs, double tol,
                  int max_iterations) {
  if (sys.kind() != SystemKind::normal_equations) {
    throw std::invalid_argument("cg_solve: requires a positive definite (normal equations) system");
  }
  const MatrixXd& M = sys.matrix();
  return cg_solve([&M](const VectorXd& v) -> VectorXd { return M * v; }, rhs, tol,
                  max_iterations);
}

CgResult cg_solve(const LinearOperator& apply, const VectorXd& rhs, double tol,
                  int max_iterations) {
  const Index dim = rhs.size();
  if (max_iterations <= 0) max_iterations = static_cast<int>(50 * dim);
  CgResult result;
  result.solution = VectorXd::Zero(dim);
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return result;

  const double target = tol * rhs_norm;
  VectorXd r = rhs;
  VectorXd p = r;
  double rr = r.squaredNorm();
  VectorXd best = result.solution;
  double best_res = rhs_norm;

  while (result.iterations < max_iterations) {
    const VectorXd Ap = apply(p);
    ++result.matvecs;
    ++result.iterations;
    const double curvature = p.dot(Ap);
    if (!(curvature > 0.0)) break;
    const double alpha = rr / curvature;
    result.solution += alpha * p;
    r -= alpha * Ap;
    const double rr_next = r.squaredNorm();
    const double res = std::sqrt(rr_next);
    if (res < best_res) {
      best_res = res;
      best = result.solution;
    }
    if (res <= target) return result;
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  std::ostringstream os;
  os << "cg_solve: no convergence after " << result.iterations << " iterations (relative residual "
     << best_res / rhs_norm << ", target " << tol << ")";
  throw NonConvergenceError(os.str(), best);
}

double condition_number(const SymmetricSystem& sys, Index cap) {
  return condition_number(sys.matrix(), cap);
}

double condition_number(const MatrixXd& symmetric_matrix, Index cap) {
  if (symmetric_matrix.rows() > cap) {
    std::ostringstream os;
    os << "condition_number: order " << symmetric_matrix.rows() << " exceeds cap " << cap;
    throw std::invalid_argument(os.str());
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetric_matrix, Eigen::EigenvaluesOnly);
  const VectorXd magnitudes = eig.eigenvalues().cwiseAbs();
  const double smallest = magnitudes.minCoeff();
  if (smallest == 0.0) return std::numeric_limits<double>::infinity();
  return magnitudes.maxCoeff() / smallest;
}

}  // namespace qipm
