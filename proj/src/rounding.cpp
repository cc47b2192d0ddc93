#include "qipm/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/QR>

#include "qipm/errors.hpp"

namespace qipm {

namespace {

constexpr double kClip = 1e-12;

VectorXd clip_small_negatives(const VectorXd& v, const char* name) {
  if (v.size() && v.minCoeff() < -kClip) {
    throw std::invalid_argument(std::string("identify_partition: ") + name +
                                " has a component below -1e-12");
  }
  return v.cwiseMax(0.0);
}

MatrixXd columns(const MatrixXd& A, const std::vector<Index>& idx) {
  MatrixXd out(A.rows(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = A.col(idx[k]);
  return out;
}

}  // namespace

Partition identify_partition(const VectorXd& x_in, const VectorXd& s_in, double tau) {
  if (x_in.size() != s_in.size()) throw DimensionError("identify_partition: length mismatch");
  const VectorXd x = clip_small_negatives(x_in, "x");
  const VectorXd s = clip_small_negatives(s_in, "s");
  const Index n = x.size();
  if (!(tau > 0.0) && n > 0) tau = std::sqrt(x.dot(s) / static_cast<double>(n));

  Partition p;
  for (Index j = 0; j < n; ++j) {
    const bool in_b = x[j] >= tau;
    const bool in_n = s[j] >= tau;
    if (in_b == in_n) {
      p.undecided.push_back(j);
    } else if (in_b) {
      p.B.push_back(j);
    } else {
      p.N.push_back(j);
    }
  }
  return p;
}

OptimalSolution crossover(const LpInstance& inst, const Partition& partition,
                          const VectorXd& x_approx, const VectorXd& y_approx, double kkt_tol) {
  const Index n = inst.n();
  const Index m = inst.m();
  if (!partition.undecided.empty()) {
    throw std::invalid_argument("crossover: partition has undecided indices");
  }
  if (partition.B.size() + partition.N.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("crossover: partition does not cover every index");
  }
  if (x_approx.size() != n || y_approx.size() != m) {
    throw DimensionError("crossover: approximate solution has wrong dimensions");
  }

  OptimalSolution out;
  out.x = VectorXd::Zero(n);
  out.y = y_approx;
  if (!partition.B.empty()) {
    const MatrixXd AB = columns(inst.A, partition.B);
    VectorXd xB(AB.cols());
    for (std::size_t k = 0; k < partition.B.size(); ++k) {
      xB[static_cast<Index>(k)] = x_approx[partition.B[k]];
    }
    // Closest point of the affine set: minimum-norm correction.
    const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(AB);
    xB += cod.solve(inst.b - AB * xB);
    for (std::size_t k = 0; k < partition.B.size(); ++k) {
      out.x[partition.B[k]] = xB[static_cast<Index>(k)];
    }
    const MatrixXd ABt = AB.transpose();
    VectorXd cB(ABt.rows());
    for (std::size_t k = 0; k < partition.B.size(); ++k) {
      cB[static_cast<Index>(k)] = inst.c[partition.B[k]];
    }
    const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod_t(ABt);
    out.y += cod_t.solve(cB - ABt * out.y);
  }
  out.s = inst.c - inst.A.transpose() * out.y;
  out.primal_value = inst.c.dot(out.x);
  out.dual_value = inst.b.dot(out.y);

  const double primal_res = (inst.A * out.x - inst.b).cwiseAbs().maxCoeff();
  const double x_neg = std::max(0.0, -out.x.minCoeff());
  const double s_neg = std::max(0.0, -out.s.minCoeff());
  const double comp = std::abs(out.x.dot(out.s));
  out.kkt_error = std::max({primal_res, x_neg, s_neg, comp});
  if (!(out.kkt_error <= kkt_tol)) {
    std::ostringstream os;
    os << "crossover: KKT check failed (||Ax - b||_inf = " << primal_res << ", min x = "
       << out.x.minCoeff() << ", min s = " << out.s.minCoeff() << ", x^T s = " << out.x.dot(out.s)
       << ", tolerance " << kkt_tol << ")";
    throw WrongPartitionError(os.str());
  }
  return out;
}

}  // namespace qipm
