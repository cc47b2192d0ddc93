#pragma once

// Outer iterative refinement of the dual solution.
//
// Stage k solves the refining problem (A, b, nabla * s_k), s_k = c - A^T y_k,
// to a fixed gap zeta_tilde, then accumulates y <- y_k + y_hat / nabla and
// grows nabla by 1 / zeta_tilde. The primal feasible set never changes, so
// a primal estimate from one stage can seed the next stage's barrier value.

#include <string>
#include <vector>

#include "qipm/ipm.hpp"
#include "qipm/lp_core.hpp"
#include "qipm/qsim.hpp"

namespace qipm {

struct IrConfig {
  double zeta = 1e-10;       // final accuracy
  double zeta_tilde = 1e-2;  // per-stage accuracy
  IpmConfig ipm;             // mu_min and gap_target are set per stage
  int center_max_steps = 50;
  double center_target = 0.25;  // proximity reached by center_start before each stage
};

struct StageReport {
  int stage = 0;
  int nabla_exponent = 0;
  double gap_before = 0.0;  // original units: mu (n + sqrt(n) delta) / nabla
  double gap_after = 0.0;
  double dual_objective = 0.0;  // b^T y after this stage's update
  int center_steps = 0;
  int ipm_iterations = 0;
  double kappa0 = 0.0;    // first sampled condition number of this stage
  double max_cond = 0.0;  // over this stage's sampled iterations
  double qram_queries = 0.0;
  std::int64_t classical_ops = 0;
  bool projected = false;
  IpmTrace trace;
};

struct RefinementState {
  int nabla_exponent = 0;  // nabla = (1 / zeta_tilde)^nabla_exponent
  int stage = 0;           // completed stages
  CompensatedVector y_acc;
  double zeta = 0.0;
  double zeta_tilde = 0.0;
  std::vector<StageReport> stage_reports;
  CostLedger ledger;

  double nabla() const;
  /// {"zeta", "zeta_tilde", "stages": [{stage, nabla_exponent, gap_before,
  /// gap_after, ipm_iterations, max_cond, qram_queries, classical_ops, ...}]}
  std::string report_json() const;
};

/// Number of stages: ceil(log zeta / log zeta_tilde).
int refinement_stage_count(double zeta, double zeta_tilde);

/// (1 / zeta_tilde)^k, with the base snapped to an integer when it is one.
double nabla_power(double zeta_tilde, int k);

struct DualPair {
  VectorXd y;
  VectorXd s;
};

/// Least-squares dual projection: A A^T y = A (c - s_k), s = c - A^T y.
/// With `weights` w the residual is measured as ||W (A^T y + s_k - c)||, i.e.
/// A W^2 A^T y = A W^2 (c - s_k).
DualPair project_dual(const LpInstance& inst, const VectorXd& s_k,
                      const VectorXd* weights = nullptr);

struct RefiningProblem {
  LpInstance instance;  // (A, b, nabla * s_k)
  DualIterate start;    // y' = 0, s' = nabla * s_k, mu unset (0)
};

/// Throws CannotRefineError unless c - A^T y_k > 0.
RefiningProblem build_refining_problem(const LpInstance& inst, const VectorXd& y_k, double nabla);
RefiningProblem build_refining_problem(const LpInstance& inst, const CompensatedVector& y_k,
                                       double nabla);

struct CenteredStart {
  DualIterate iterate;
  double delta = 0.0;
  int steps = 0;
};

/// Damped exact Newton centering (step 1 / (1 + delta)) at a fixed barrier
/// value until delta <= target. If start.mu > 0 that value is used;
/// otherwise mu = s^T x / n with x the primal hint, or the least-squares
/// solution of A x = b clipped to positives, or ||s||^2 / n as a last resort.
/// Throws CenteringFailureError after max_steps.
CenteredStart center_start(const LpInstance& inst, const DualIterate& start, int max_steps = 50,
                           const VectorXd* primal_hint = nullptr, double target = 0.5);

struct IrResult {
  DualIterate iterate;  // original-problem dual point; mu in original units
  VectorXd primal;      // primal estimate from the last stage
  RefinementState state;
};

/// Throws StageFailureError (with the stage index) when a stage fails.
IrResult ir_ae_qipm(const LpInstance& inst, const DualIterate& start, const IrConfig& config,
                    const NoiseModel& noise);

}  // namespace qipm
