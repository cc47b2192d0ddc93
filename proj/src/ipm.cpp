#include "qipm/ipm.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "qipm/errors.hpp"

namespace qipm {

namespace {

// Proximity treated as zero (the generator's centrality tolerance).
constexpr double kZeroProximity = 1e-10;

void require_interior(const DualIterate& it, const char* what) {
  if (!(it.mu > 0.0)) throw InteriorViolationError(std::string(what) + ": mu must be positive");
  if (it.s.size() == 0 || !((it.s.array() > 0.0).all())) {
    throw InteriorViolationError(std::string(what) + ": slack is not strictly positive");
  }
}

std::int64_t factor_ops(Index m, Index n) {
  // A S^-2 A^T (m^2 n) plus its Cholesky (m^3 / 3)
  return static_cast<std::int64_t>(m * m * n + (m * m * m) / 3);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "exact") return SolverKind::exact;
  if (name == "quantum" || name == "quantum_emulated") return SolverKind::quantum_emulated;
  if (name == "cg" || name == "cg_baseline") return SolverKind::cg_baseline;
  throw std::invalid_argument("unknown solver '" + name + "' (expected exact|quantum|cg)");
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::exact:
      return "exact";
    case SolverKind::quantum_emulated:
      return "quantum";
    case SolverKind::cg_baseline:
      return "cg";
  }
  return "unknown";
}

double IpmConfig::theta_for(Index n) const {
  if (theta > 0.0) {
    if (!(theta < 1.0)) throw std::invalid_argument("IpmConfig: theta must lie in (0, 1)");
    return theta;
  }
  return 1.0 / (2.0 * std::sqrt(static_cast<double>(n)));
}

SymmetricSystem NewtonSystem::scaled_system() const {
  const Index lead = system.leading();
  const Index rest = system.order() - lead;
  const MatrixXd A = system.matrix().bottomLeftCorner(rest, lead);
  return SymmetricSystem::augmented(VectorXd::Ones(lead),
                                    A * (mu_snapshot * s_snapshot.cwiseInverse()).asDiagonal());
}

SymmetricSystem NewtonSystem::equilibrated_system() const {
  const Index lead = system.leading();
  const Index rest = system.order() - lead;
  const MatrixXd A = system.matrix().bottomLeftCorner(rest, lead);
  return SymmetricSystem::augmented(VectorXd::Ones(lead), A * s_snapshot.cwiseInverse().asDiagonal());
}

VectorXd NewtonSystem::scaled_sigma() const {
  VectorXd out = sigma;
  out.tail(system.order() - system.leading()) *= mu_snapshot;
  return out;
}

NewtonSystem assemble_newton(const LpInstance& inst, const DualIterate& iterate) {
  require_interior(iterate, "assemble_newton");
  if (iterate.s.size() != inst.n()) throw DimensionError("assemble_newton: slack has wrong length");
  const Index n = inst.n();
  const Index m = inst.m();
  const VectorXd s_inv = iterate.s.cwiseInverse();
  VectorXd sigma = VectorXd::Zero(n + m);
  sigma.tail(m) = inst.A * s_inv - inst.b / iterate.mu;
  return NewtonSystem{SymmetricSystem::augmented(iterate.s.cwiseProduct(iterate.s), inst.A),
                      std::move(sigma), iterate.s, iterate.mu};
}

NewtonStep newton_step(const LpInstance& inst, const DualIterate& iterate, const IpmConfig& config,
                       NoiseChannel& noise, CostLedger* ledger) {
  require_interior(iterate, "newton_step");
  const Index n = inst.n();
  const Index m = inst.m();
  const VectorXd s_inv = iterate.s.cwiseInverse();
  NewtonStep step;

  if (config.solver == SolverKind::cg_baseline) {
    const VectorXd w = s_inv.cwiseProduct(s_inv);
    const MatrixXd& A = inst.A;
    const VectorXd rhs = inst.b / iterate.mu - A * s_inv;
    const CgResult cg = cg_solve(
        [&A, &w](const VectorXd& v) -> VectorXd {
          return A * w.cwiseProduct(A.transpose() * v);
        },
        rhs, config.newton_tol);
    step.dy = cg.solution;
    step.ds = -(A.transpose() * step.dy);
    step.inner_iterations = cg.iterations;
    if (ledger != nullptr) {
      const std::int64_t mn = static_cast<std::int64_t>(m * n);
      ledger->record_classical(event_kind::classical,
                               cg.matvecs * (4 * mn + n) + 10 * m * cg.iterations + 4 * mn);
    }
  } else {
    const NewtonSystem sys = assemble_newton(inst, iterate);
    const SymmetricSystem scaled = sys.scaled_system();
    const VectorXd rhs = sys.scaled_sigma();
    VectorXd z;
    if (config.solver == SolverKind::exact) {
      z = exact_solve(scaled, rhs);
      step.inner_iterations = 1;
      if (ledger != nullptr) ledger->record_classical(event_kind::classical, factor_ops(m, n));
    } else {
      RefinedSolveOptions options;
      options.tol = config.newton_tol;
      options.cost.kappa = config.cost_kappa;
      options.cost.frob_norm = config.cost_frob_norm > 0.0 ? config.cost_frob_norm : inst.A.norm();
      LinearSolveReport report = refined_linear_solve(scaled, rhs, noise, options);
      z = std::move(report.solution);
      step.inner_iterations = report.iterations;
      step.residual_history = std::move(report.residual_history);
      if (ledger != nullptr) *ledger += report.ledger_delta;
    }
    step.ds = iterate.s.cwiseProduct(z.head(n));
    step.dy = iterate.mu * z.tail(m);
  }
  step.scaled_step_residual = s_inv.cwiseProduct(step.ds + inst.A.transpose() * step.dy).norm();
  return step;
}

double proximity(const LpInstance& inst, const DualIterate& iterate, CostLedger* ledger) {
  require_interior(iterate, "proximity");
  const DualNewtonDirection dir = exact_dual_newton(inst.A, inst.b, iterate.s, iterate.mu);
  if (ledger != nullptr) ledger->record_classical(event_kind::classical, factor_ops(inst.m(), inst.n()));
  return dir.delta;
}

PerturbationCheck check_perturbation_conditions(const VectorXd& s0, const VectorXd& r,
                                                const VectorXd& xi, double delta_tilde) {
  if (s0.size() != r.size() || s0.size() != xi.size()) {
    throw DimensionError("check_perturbation_conditions: vector lengths differ");
  }
  const VectorXd perturbed = s0 + r;
  if (!((s0.array() > 0.0).all()) || !((perturbed.array() > 0.0).all())) {
    throw InteriorViolationError("check_perturbation_conditions: nonpositive slack");
  }
  const Eigen::ArrayXd rho = s0.array() / perturbed.array();
  PerturbationCheck out;
  out.lhs1 = s0.size() ? (rho * (1.0 - rho)).abs().maxCoeff() : 0.0;
  out.lhs2 = s0.size() ? (1.0 - rho.square()).abs().maxCoeff() : 0.0;
  out.lhs3 = (xi.array() / perturbed.array()).matrix().norm();
  out.rhs1 = 0.033 * delta_tilde;
  out.rhs2 = 0.033;
  out.rhs3 = 0.033 * delta_tilde;
  out.pass = out.lhs1 <= out.rhs1 && out.lhs2 <= out.rhs2 && out.lhs3 <= out.rhs3;
  return out;
}

IpmResult ae_qipm_solve(const LpInstance& inst, const DualIterate& start, const IpmConfig& config,
                        const NoiseModel& noise_model) {
  if (!(config.mu_min > 0.0)) throw std::invalid_argument("IpmConfig: mu_min must be positive");
  require_interior(start, "ae_qipm_solve");
  const Index n = inst.n();
  const Index m = inst.m();
  if (start.s.size() != n || start.y.size() != m) {
    throw DimensionError("ae_qipm_solve: start has wrong dimensions");
  }
  const double theta = config.theta_for(n);
  NoiseChannel noise(noise_model);

  IpmResult result;
  IpmTrace& trace = result.trace;
  trace.ledger = CostLedger(noise_model.query_constant);
  DualIterate it = start;
  if (it.drift.size() != n) it.drift = dual_residual(inst, it.y, it.s);

  const bool cond_every_iteration = n + m <= kConditionNumberCap;
  std::vector<double> deltas;
  const double mu0 = start.mu;
  int k = 0;

  while (it.mu > config.mu_min && k < config.max_iterations) {
    const double q_before = trace.ledger.qram_queries();
    const std::int64_t ops_before = trace.ledger.classical_ops();

    IpmRecord rec;
    rec.iter = k;
    rec.mu = it.mu;
    rec.delta = proximity(inst, it);
    deltas.push_back(rec.delta);
    if (!(rec.delta < 0.5)) {
      std::ostringstream os;
      os << "ae_qipm_solve: proximity " << rec.delta << " >= 1/2 at iteration " << k
         << " (mu = " << it.mu << ")";
      throw CentralityLossError(os.str(), deltas);
    }
    if (config.gap_target > 0.0 && gap_bound(n, it.mu, rec.delta) <= config.gap_target) break;

    const NewtonSystem sys = assemble_newton(inst, it);
    if (config.track_condition && (cond_every_iteration || k % 10 == 0)) {
      rec.cond = condition_number(sys.equilibrated_system(), std::numeric_limits<Index>::max());
    }

    if (sys.sigma.tail(m).norm() <= config.skip_threshold) {
      rec.skipped = true;
    } else {
      NewtonStep step;
      try {
        step = newton_step(inst, it, config, noise, &trace.ledger);
      } catch (const DivergingSolverError& e) {
        std::ostringstream os;
        os << e.what() << " [ipm iteration " << k << ", mu = " << it.mu << "]";
        throw DivergingSolverError(os.str(), e.kappa_eps_product);
      } catch (const NonConvergenceError& e) {
        std::ostringstream os;
        os << e.what() << " [ipm iteration " << k << ", mu = " << it.mu << "]";
        throw NonConvergenceError(os.str(), e.best_iterate);
      }
      rec.inner_iterations = step.inner_iterations;
      const VectorXd xi = step.ds + inst.A.transpose() * step.dy;
      // The conditions scale with delta and demand xi = 0 at delta = 0; a
      // numerically centred iterate is outside their scope.
      if (config.check_perturbation && rec.delta > kZeroProximity) {
        const VectorXd s0 = it.s - it.drift;
        if ((s0.array() > 0.0).all()) {
          rec.perturbation = check_perturbation_conditions(s0, it.drift, xi, rec.delta);
          rec.perturbation_checked = true;
        }
      }
      it.y += step.dy;
      it.s += step.ds;
      it.drift += xi;
      if (!((it.s.array() > 0.0).all())) {
        std::ostringstream os;
        os << "ae_qipm_solve: full Newton step left the interior at iteration " << k;
        throw InteriorViolationError(os.str());
      }
    }
    rec.drift_inf = it.drift.size() ? it.drift.cwiseAbs().maxCoeff() : 0.0;
    ++k;
    it.mu = mu0 * std::pow(1.0 - theta, k);
    rec.qram_queries = trace.ledger.qram_queries() - q_before;
    rec.classical_ops = trace.ledger.classical_ops() - ops_before;
    trace.records.push_back(rec);
  }

  trace.final_delta = proximity(inst, it);
  trace.final_iterate = it;
  result.iterate = std::move(it);
  return result;
}

std::string IpmTrace::to_csv() const {
  std::ostringstream os;
  os << "iter,mu,delta,drift_inf,cond_M,skipped,qram_queries,classical_ops\n";
  for (const auto& r : records) {
    os << r.iter << ',' << fmt(r.mu) << ',' << fmt(r.delta) << ',' << fmt(r.drift_inf) << ','
       << (std::isnan(r.cond) ? std::string() : fmt(r.cond)) << ',' << (r.skipped ? 1 : 0) << ','
       << fmt(r.qram_queries) << ',' << r.classical_ops << '\n';
  }
  return os.str();
}

}  // namespace qipm
