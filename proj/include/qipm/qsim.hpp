#pragma once

// Classical emulation of the quantum subroutines used by the solver.
//
// Each quantum primitive is replaced by its exact classical counterpart plus a
// bounded, seeded error, and every call is booked in a CostLedger. Quantum
// costs in the ledger are *modeled* (a query formula evaluated on the event's
// inputs); classical costs are *measured* arithmetic-operation counts.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qipm/dense_la.hpp"

namespace qipm {

enum class NoiseMode {
  /// Read-out error is relative to the solution vector: the correction is
  /// M^-1 r up to a relative error, so contraction degrades with kappa(M).
  solution_space,
  /// Error is relative to the residual being corrected: the correction is
  /// M^-1 (r + e) with ||e|| <= eps_tomo ||r||, a kappa-independent contraction.
  /// Norm estimates are folded into this single error budget.
  residual_space,
};

struct NoiseModel {
  double eps_tomo = 1e-2;
  double eps_norm = 1e-2;
  double eps_matvec = 0.0;
  NoiseMode mode = NoiseMode::residual_space;
  std::uint64_t seed = 0;
  double query_constant = 1.0;  // c in the query formulas

  /// Throws std::invalid_argument unless every epsilon lies in [0, 0.5).
  void validate() const;
};

/// Seeded error source shared by all emulated primitives of one run.
class NoiseChannel {
 public:
  explicit NoiseChannel(NoiseModel model);

  const NoiseModel& model() const { return model_; }

  double uniform(double lo, double hi);
  /// Uniformly random direction scaled to norm `radius * U(0,1)`.
  VectorXd perturbation(Index size, double radius);

 private:
  NoiseModel model_;
  std::mt19937_64 rng_;
};

/// Formula inputs attached to a cost event.
struct CostInputs {
  double dim = 0.0;        // order of the system / vector length
  double kappa = 1.0;      // condition number fed to the query formula
  double frob_norm = 1.0;  // ||A||_F
  double eps = 1e-2;       // precision of the emulated primitive

  bool operator==(const CostInputs&) const = default;
};

struct CostEvent {
  std::string kind;
  std::int64_t count = 0;
  CostInputs inputs;
  bool quantum = true;  // false: classical arithmetic, `count` is the op count
};

namespace event_kind {
inline constexpr const char* inverse_tomography = "inverse_tomography";
inline constexpr const char* norm_estimation = "norm_estimation";
inline constexpr const char* matvec = "quantum_matvec";
inline constexpr const char* classical = "classical_ops";
}  // namespace event_kind

/// Modeled query cost of one event of `kind` (per unit count):
///   inverse_tomography : c * (dim / eps) * kappa * ||A||_F
///   norm_estimation    : c * kappa * ||A||_F
///   quantum_matvec     : c * log2(dim / eps)^2        (polylog(n / eps))
double modeled_queries(const std::string& kind, const CostInputs& in, double query_constant);

class CostLedger {
 public:
  CostLedger(double query_constant = 1.0) : query_constant_(query_constant) {}

  void record_quantum(const std::string& kind, const CostInputs& inputs, std::int64_t count = 1);
  void record_classical(const std::string& label, std::int64_t ops);

  double qram_queries() const { return qram_queries_; }
  std::int64_t classical_ops() const { return classical_ops_; }
  double query_constant() const { return query_constant_; }
  const std::vector<CostEvent>& events() const { return events_; }

  CostLedger& operator+=(const CostLedger& other);

  /// {"qram_queries", "classical_ops", "events": [{"kind","count","inputs"}]}
  std::string to_json() const;

 private:
  void append(CostEvent ev);

  double query_constant_;
  double qram_queries_ = 0.0;
  std::int64_t classical_ops_ = 0;
  std::vector<CostEvent> events_;
};

struct LedgerBreakdown {
  std::string kind;
  bool quantum = true;
  std::int64_t count = 0;
  double qram_queries = 0.0;
  std::int64_t classical_ops = 0;
};

struct LedgerReport {
  double qram_queries_modeled = 0.0;
  std::int64_t classical_ops_measured = 0;
  double n = 0.0;
  std::vector<LedgerBreakdown> breakdown;

  std::string to_json() const;
};

/// Re-evaluates every quantum event's formula with `kappa` and `frob_norm`
/// (values <= 0 keep each event's recorded input). Classical counts are
/// passed through unchanged.
LedgerReport ledger_report(const CostLedger& ledger, double n, double kappa, double frob_norm);

struct UnitSolve {
  VectorXd direction;   // unit vector u
  double norm_estimate;  // estimate of ||M^-1 (r / ||r||)||
};

/// Emulated "apply M^-1 to |r>, then tomography + norm estimation".
UnitSolve noisy_unit_solve(const SymmetricFactorization& factor, const VectorXd& r,
                           NoiseChannel& noise, CostLedger* ledger, const CostInputs& cost);
UnitSolve noisy_unit_solve(const SymmetricSystem& sys, const VectorXd& r, NoiseChannel& noise,
                           CostLedger* ledger, const CostInputs& cost);

/// Emulated quantum matrix-vector product with componentwise relative error
/// at most eps_matvec.
VectorXd quantum_matvec(const MatrixXd& M, const VectorXd& z, NoiseChannel& noise,
                        CostLedger* ledger);

struct LinearSolveReport {
  VectorXd solution;
  int iterations = 0;
  std::vector<double> residual_history;  // ||r^k|| for k = 0, 1, ...
  CostLedger ledger_delta;
};

struct RefinedSolveOptions {
  double tol = 1e-10;  // absolute residual target ||sigma - M z||
  int max_iterations = 200;
  CostInputs cost;  // dim is filled in from the system
};

/// Iteratively refined linear solver: z <- z + ||r|| * ||p|| * u with
/// (u, ||p||) from noisy_unit_solve on r = sigma - M z. Stops once the
/// residual is at most tol or at the floating-point floor. Raises
/// DivergingSolverError after three consecutive non-decreasing residuals or
/// when max_iterations is exhausted.
LinearSolveReport refined_linear_solve(const SymmetricFactorization& factor,
                                       const VectorXd& sigma, NoiseChannel& noise,
                                       const RefinedSolveOptions& options);
LinearSolveReport refined_linear_solve(const SymmetricSystem& sys, const VectorXd& sigma,
                                       NoiseChannel& noise, const RefinedSolveOptions& options);

}  // namespace qipm
