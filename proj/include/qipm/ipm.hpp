#pragma once

// Dual log-barrier interior point method with full Newton steps.
//
// Each iteration solves the saddle-point Newton system
//
//   [ S^2  A^T ] [ dŝ ]   [        0         ]
//   [ A     0  ] [ dy ] = [ A S^-1 e - b/mu  ]
//
// and moves y += dy, s += S^2 dŝ, mu *= (1 - theta). With this sign and
// right-hand side the step equals the closed form
//   ds = -A^T (A S^-2 A^T)^-1 (b/mu - A S^-1 e).

#include <limits>
#include <string>
#include <vector>

#include "qipm/dense_la.hpp"
#include "qipm/lp_core.hpp"
#include "qipm/qsim.hpp"

namespace qipm {

enum class SolverKind { exact, quantum_emulated, cg_baseline };

SolverKind parse_solver_kind(const std::string& name);
std::string to_string(SolverKind kind);

struct NewtonSystem {
  SymmetricSystem system;  // [[S^2, A^T], [A, 0]]
  VectorXd sigma;          // (0, A S^-1 e - b/mu)
  VectorXd s_snapshot;
  double mu_snapshot = 0.0;

  /// Symmetrically rescaled form diag(S^-1, mu I) M diag(S^-1, mu I)
  ///   = [[I, mu S^-1 A^T], [mu A S^-1, 0]]
  /// acting on (S^-1 ds, dy / mu) with right-hand side scaled_sigma(). Every
  /// block is O(1) near the central path (mu S^-1 approximates the primal
  /// point), so absolute residual targets are meaningful. This is the system
  /// handed to the emulated solvers.
  SymmetricSystem scaled_system() const;
  /// Diagonally equilibrated M: diag(S^-1, I) M diag(S^-1, I)
  ///   = [[I, S^-1 A^T], [A S^-1, 0]].
  /// Its condition number is the one recorded in traces.
  SymmetricSystem equilibrated_system() const;
  /// (0, mu A S^-1 e - b)
  VectorXd scaled_sigma() const;
  Index n() const { return s_snapshot.size(); }
};

struct IpmConfig {
  double theta = 0.0;         // <= 0 selects 1 / (2 sqrt(n))
  double mu_min = 1e-8;       // stop once mu <= mu_min
  double gap_target = 0.0;    // > 0: also stop once mu (n + sqrt(n) delta) <= gap_target
  double newton_tol = 1e-10;  // inner solve tolerance
  double skip_threshold = 1e-12;
  SolverKind solver = SolverKind::exact;
  bool track_condition = true;
  bool check_perturbation = true;
  int max_iterations = 1000000;
  double cost_kappa = 1.0;      // kappa fed to the query formulas
  double cost_frob_norm = 0.0;  // <= 0 selects ||A||_F

  double theta_for(Index n) const;
};

struct PerturbationCheck {
  double lhs1 = 0.0;
  double lhs2 = 0.0;
  double lhs3 = 0.0;
  double rhs1 = 0.0;
  double rhs2 = 0.033;
  double rhs3 = 0.0;
  bool pass = true;
};

struct IpmRecord {
  int iter = 0;
  double mu = 0.0;
  double delta = 0.0;
  double drift_inf = 0.0;
  double cond = std::numeric_limits<double>::quiet_NaN();  // kappa(equilibrated M); NaN if not sampled
  bool skipped = false;
  int inner_iterations = 0;
  double qram_queries = 0.0;       // this iteration only
  std::int64_t classical_ops = 0;  // this iteration only
  bool perturbation_checked = false;
  PerturbationCheck perturbation;
};

struct IpmTrace {
  std::vector<IpmRecord> records;
  DualIterate final_iterate;
  double final_delta = 0.0;
  CostLedger ledger;

  int iterations() const { return static_cast<int>(records.size()); }
  /// Columns: iter,mu,delta,drift_inf,cond_M,skipped,qram_queries,classical_ops
  std::string to_csv() const;
};

struct IpmResult {
  DualIterate iterate;
  IpmTrace trace;
};

struct NewtonStep {
  VectorXd dy;
  VectorXd ds;
  int inner_iterations = 0;
  std::vector<double> residual_history;
  /// ||S^-1 (ds + A^T dy)||: scaled first-block residual of the solve.
  double scaled_step_residual = 0.0;
};

/// Throws InteriorViolationError unless s > 0 and mu > 0.
NewtonSystem assemble_newton(const LpInstance& inst, const DualIterate& iterate);

NewtonStep newton_step(const LpInstance& inst, const DualIterate& iterate, const IpmConfig& config,
                       NoiseChannel& noise, CostLedger* ledger);

/// delta = ||S^-1 ds|| with ds the exact Newton step at (s, mu).
double proximity(const LpInstance& inst, const DualIterate& iterate, CostLedger* ledger = nullptr);

/// Full-step dual log-barrier method. Throws CentralityLossError if the
/// proximity reaches 1/2.
IpmResult ae_qipm_solve(const LpInstance& inst, const DualIterate& start, const IpmConfig& config,
                        const NoiseModel& noise);

/// Sufficient conditions for an inexact step to be an admissible inexact step
/// of the perturbed problem. The solver evaluates them only when delta_tilde
/// exceeds 1e-10; at delta = 0 they cannot be met by any nonzero xi. `s0` is the original-problem slack, `r` the
/// accumulated drift (so s0 + r is the perturbed slack), `xi` this step's error.
PerturbationCheck check_perturbation_conditions(const VectorXd& s0, const VectorXd& r,
                                                const VectorXd& xi, double delta_tilde);

}  // namespace qipm
