#pragma once

// Standard-form LP data model:
//
//   (P)  min c^T x   s.t.  A x = b, x >= 0
//   (D)  max b^T y   s.t.  A^T y + s = c, s >= 0
//
// The dual log-barrier method only tracks (y, s, mu); the primal point is
// implicit and recovered on demand by primal_estimate().

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace qipm {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Certificate {
  VectorXd x_star;
  VectorXd y_star;
  VectorXd s_star;
  std::vector<Index> partition_B;  // 0-based, sorted
  std::vector<Index> partition_N;  // 0-based, sorted
  double opt_value = 0.0;
  bool degenerate = false;  // |B| > m: x* is a vertex but not the only optimum
};

struct DualIterate {
  VectorXd y;
  VectorXd s;
  double mu = 0.0;
  VectorXd drift;  // accumulated A^T y + s - c caused by inexact steps
};

struct LpInstance {
  std::string name;
  MatrixXd A;
  VectorXd b;
  VectorXd c;
  bool integer_data = false;
  std::optional<Certificate> certificate;
  std::optional<DualIterate> start;  // optional well-centered dual start

  Index m() const { return A.rows(); }
  Index n() const { return A.cols(); }

  /// Throws DimensionError on inconsistent shapes or m > n, and
  /// RankDeficientError when A lacks full row rank.
  void validate() const;
};

/// Binary encoding length of integer problem data.
std::uint64_t encoding_length(const LpInstance& inst);

/// A^T y + s - c.
VectorXd dual_residual(const LpInstance& inst, const VectorXd& y, const VectorXd& s);

/// mu (n + sqrt(n) delta): upper estimate of x^T s near the central path.
double gap_bound(Index n, double mu, double delta);

/// x = mu S^{-1}(e - S^{-1} ds). Satisfies A x = b when ds is the exact dual
/// Newton step at (s, mu).
VectorXd primal_estimate(const LpInstance& inst, const DualIterate& iterate,
                         const VectorXd& delta_s);

/// Exact dual log-barrier Newton direction at (s, mu):
///   dy = (A S^-2 A^T)^{-1} (b/mu - A S^{-1} e),  ds = -A^T dy.
struct DualNewtonDirection {
  VectorXd dy;
  VectorXd ds;
  double delta = 0.0;  // ||S^{-1} ds||
};
DualNewtonDirection exact_dual_newton(const MatrixXd& A, const VectorXd& b,
                                      const VectorXd& s, double mu);

bool full_row_rank(const MatrixXd& A);

// --- compensated arithmetic -------------------------------------------------

/// A dual vector kept as an unevaluated sum hi + lo, so that many small
/// corrections can be accumulated without losing them to rounding.
struct CompensatedVector {
  VectorXd hi;
  VectorXd lo;

  explicit CompensatedVector(Index size = 0)
      : hi(VectorXd::Zero(size)), lo(VectorXd::Zero(size)) {}
  explicit CompensatedVector(const VectorXd& v) : hi(v), lo(VectorXd::Zero(v.size())) {}

  void add(const VectorXd& v);
  VectorXd value() const { return hi + lo; }
};

/// c - A^T y evaluated with error-free products and Neumaier summation.
VectorXd compensated_slack(const MatrixXd& A, const VectorXd& c, const CompensatedVector& y);

/// b^T y, compensated.
double compensated_dot(const VectorXd& b, const CompensatedVector& y);

// --- generation & I/O -----------------------------------------------------

struct InstanceSpec {
  Index n = 8;
  Index m = 4;
  bool degenerate = false;
  std::uint64_t seed = 0;
  int entry_bound = 10;  // A entries drawn from [-entry_bound, entry_bound]
  double mu0 = 1.0;      // barrier parameter of the emitted start
};

struct GeneratedInstance {
  LpInstance instance;
  DualIterate start;
  Certificate certificate;
};

/// Planted-certificate instance with a start exactly on the central path.
GeneratedInstance generate_instance(const InstanceSpec& spec);

LpInstance load_instance(const std::filesystem::path& path);
void save_instance(const LpInstance& inst, const std::filesystem::path& path);

std::string instance_to_json(const LpInstance& inst);
LpInstance instance_from_json(const std::string& text);

}  // namespace qipm
