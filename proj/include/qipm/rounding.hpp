#pragma once

// Rounding a near-optimal interior point to an exact optimal solution:
// guess the optimal partition from (x, s), then project onto the optimal
// faces it defines.

#include <vector>

#include "qipm/lp_core.hpp"

namespace qipm {

struct Partition {
  std::vector<Index> B;          // x_j >= tau
  std::vector<Index> N;          // s_j >= tau
  std::vector<Index> undecided;  // in both sets or in neither
};

/// tau <= 0 selects sqrt(x^T s / n). Entries above -1e-12 are clipped to 0;
/// more negative entries raise std::invalid_argument.
Partition identify_partition(const VectorXd& x, const VectorXd& s, double tau = 0.0);

struct OptimalSolution {
  VectorXd x;
  VectorXd y;
  VectorXd s;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double kkt_error = 0.0;  // max of the four KKT residuals
};

/// Primal: closest x_B to x_approx_B with A_B x_B = b, x_N = 0.
/// Dual: closest y to y_approx with (A^T y)_B = c_B, s = c - A^T y.
/// Throws std::invalid_argument for an undecided partition and
/// WrongPartitionError when any KKT condition fails by more than `kkt_tol`.
OptimalSolution crossover(const LpInstance& inst, const Partition& partition,
                          const VectorXd& x_approx, const VectorXd& y_approx,
                          double kkt_tol = 1e-10);

}  // namespace qipm
