#include "qipm/lp_core.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "qipm/errors.hpp"

namespace qipm {

namespace {

// Number of bits of |v| for integral v, i.e. ceil(log2(|v| + 1)).
std::uint64_t bit_length(double v) {
  const auto magnitude = static_cast<std::uint64_t>(std::fabs(v));
  return static_cast<std::uint64_t>(std::bit_width(magnitude));
}

bool is_integral(double v) { return std::isfinite(v) && v == std::round(v); }

// Error-free transformation a + b = s + err.
inline void two_sum(double a, double b, double& s, double& err) {
  s = a + b;
  const double bv = s - a;
  err = (a - (s - bv)) + (b - bv);
}

// Neumaier running sum.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  void add_product(double a, double b) {
    const double p = a * b;
    add(p);
    add(std::fma(a, b, -p));
  }
  double value() const { return sum + comp; }
};

}  // namespace

void LpInstance::validate() const {
  if (A.rows() < 1 || A.cols() < 1) {
    throw DimensionError("instance '" + name + "': A must be non-empty");
  }
  if (b.size() != A.rows() || c.size() != A.cols()) {
    std::ostringstream os;
    os << "instance '" << name << "': A is " << A.rows() << "x" << A.cols() << " but b has "
       << b.size() << " and c has " << c.size() << " entries";
    throw DimensionError(os.str());
  }
  if (A.rows() > A.cols()) {
    throw DimensionError("instance '" + name + "': m > n is not a standard-form instance");
  }
  if (!full_row_rank(A)) {
    throw RankDeficientError("instance '" + name + "': A does not have full row rank");
  }
}

bool full_row_rank(const MatrixXd& A) {
  Eigen::FullPivLU<MatrixXd> lu(A);
  return lu.rank() == A.rows();
}

std::uint64_t encoding_length(const LpInstance& inst) {
  if (!inst.integer_data) {
    throw NonIntegerDataError("encoding_length requires integer_data");
  }
  const auto m = static_cast<std::uint64_t>(inst.m());
  const auto n = static_cast<std::uint64_t>(inst.n());
  std::uint64_t total = m * n + m + n;
  auto accumulate = [&](const auto& data, const char* what) {
    for (Index k = 0; k < data.size(); ++k) {
      const double v = data.data()[k];
      if (!is_integral(v)) {
        std::ostringstream os;
        os << "encoding_length: non-integer entry " << v << " in " << what;
        throw NonIntegerDataError(os.str());
      }
      total += bit_length(v);
    }
  };
  accumulate(inst.A, "A");
  accumulate(inst.c, "c");
  accumulate(inst.b, "b");
  return total;
}

VectorXd dual_residual(const LpInstance& inst, const VectorXd& y, const VectorXd& s) {
  if (y.size() != inst.m() || s.size() != inst.n()) {
    throw DimensionError("dual_residual: dimension mismatch");
  }
  return inst.A.transpose() * y + s - inst.c;
}

double gap_bound(Index n, double mu, double delta) {
  const double dn = static_cast<double>(n);
  return mu * (dn + std::sqrt(dn) * delta);
}

VectorXd primal_estimate(const LpInstance& inst, const DualIterate& iterate,
                         const VectorXd& delta_s) {
  if (iterate.s.size() != inst.n() || delta_s.size() != inst.n()) {
    throw DimensionError("primal_estimate: dimension mismatch");
  }
  const VectorXd inv_s = iterate.s.cwiseInverse();
  return iterate.mu * inv_s.cwiseProduct(VectorXd::Ones(inst.n()) - inv_s.cwiseProduct(delta_s));
}

DualNewtonDirection exact_dual_newton(const MatrixXd& A, const VectorXd& b, const VectorXd& s,
                                      double mu) {
  if ((s.array() <= 0.0).any()) {
    throw InteriorViolationError("exact_dual_newton: slack must be strictly positive");
  }
  const VectorXd inv_s = s.cwiseInverse();
  const MatrixXd scaled = A * inv_s.asDiagonal();
  const MatrixXd normal = scaled * scaled.transpose();
  const VectorXd rhs = b / mu - scaled * VectorXd::Ones(s.size());

  Eigen::LLT<MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("exact_dual_newton: A S^-2 A^T is not positive definite");
  }
  DualNewtonDirection dir;
  dir.dy = llt.solve(rhs);
  dir.ds = -(A.transpose() * dir.dy);
  dir.delta = inv_s.cwiseProduct(dir.ds).norm();
  return dir;
}

void CompensatedVector::add(const VectorXd& v) {
  for (Index i = 0; i < v.size(); ++i) {
    double s = 0.0;
    double err = 0.0;
    two_sum(hi[i], v[i], s, err);
    hi[i] = s;
    lo[i] += err;
  }
}

VectorXd compensated_slack(const MatrixXd& A, const VectorXd& c, const CompensatedVector& y) {
  VectorXd s(A.cols());
  for (Index j = 0; j < A.cols(); ++j) {
    NeumaierSum acc;
    acc.add(c[j]);
    for (Index i = 0; i < A.rows(); ++i) {
      acc.add_product(-A(i, j), y.hi[i]);
      acc.add_product(-A(i, j), y.lo[i]);
    }
    s[j] = acc.value();
  }
  return s;
}

double compensated_dot(const VectorXd& b, const CompensatedVector& y) {
  NeumaierSum acc;
  for (Index i = 0; i < b.size(); ++i) {
    acc.add_product(b[i], y.hi[i]);
    acc.add_product(b[i], y.lo[i]);
  }
  return acc.value();
}

}  // namespace qipm
