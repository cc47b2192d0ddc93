#include "qipm/refine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "qipm/errors.hpp"

namespace qipm {

namespace {

constexpr double kProjectionTolerance = 1e-12;

bool positive(const VectorXd& v) { return v.size() > 0 && (v.array() > 0.0).all(); }

double initial_mu(const LpInstance& inst, const VectorXd& s, const VectorXd* hint) {
  const double n = static_cast<double>(inst.n());
  if (hint != nullptr && hint->size() == inst.n()) {
    const double mu = s.dot(hint->cwiseMax(0.0)) / n;
    if (mu > 0.0 && std::isfinite(mu)) return mu;
  }
  const MatrixXd gram = inst.A * inst.A.transpose();
  const VectorXd x = inst.A.transpose() * gram.ldlt().solve(inst.b);
  const double mu = s.dot(x.cwiseMax(0.0)) / n;
  if (mu > 0.0 && std::isfinite(mu)) return mu;
  return s.squaredNorm() / n;
}

}  // namespace

double RefinementState::nabla() const { return nabla_power(zeta_tilde, nabla_exponent); }

int refinement_stage_count(double zeta, double zeta_tilde) {
  if (!(zeta > 0.0 && zeta_tilde > 0.0 && zeta_tilde < 1.0 && zeta <= zeta_tilde)) {
    throw std::invalid_argument("refinement: need 0 < zeta <= zeta_tilde < 1");
  }
  const double ratio = std::log(zeta) / std::log(zeta_tilde);
  return std::max(1, static_cast<int>(std::ceil(ratio - 1e-9)));
}

double nabla_power(double zeta_tilde, int k) {
  double base = 1.0 / zeta_tilde;
  const double rounded = std::round(base);
  if (std::abs(base - rounded) <= 1e-9 * base) base = rounded;
  return std::pow(base, k);
}

DualPair project_dual(const LpInstance& inst, const VectorXd& s_k, const VectorXd* weights) {
  if (s_k.size() != inst.n()) throw DimensionError("project_dual: slack has wrong length");
  if (weights != nullptr && weights->size() != inst.n()) {
    throw DimensionError("project_dual: weights have wrong length");
  }
  const VectorXd w2 =
      weights != nullptr ? weights->cwiseAbs2() : VectorXd::Ones(inst.n()).eval();
  const MatrixXd AW = inst.A * w2.asDiagonal();
  const MatrixXd gram = AW * inst.A.transpose();
  Eigen::LLT<MatrixXd> llt(gram);
  const double scale = gram.diagonal().cwiseAbs().maxCoeff();
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const MatrixXd& L = llt.matrixLLT();
    for (Index i = 0; i < L.rows() && ok; ++i) ok = L(i, i) * L(i, i) > 1e-14 * scale;
  }
  if (!ok) throw RankDeficientError("project_dual: A A^T is singular");
  DualPair out;
  const VectorXd rhs = AW * (inst.c - s_k);
  out.y = llt.solve(rhs);
  // one refinement pass on the normal equations
  out.y += llt.solve(rhs - gram * out.y);
  out.s = inst.c - inst.A.transpose() * out.y;
  return out;
}

RefiningProblem build_refining_problem(const LpInstance& inst, const VectorXd& y_k, double nabla) {
  return build_refining_problem(inst, CompensatedVector(y_k), nabla);
}

RefiningProblem build_refining_problem(const LpInstance& inst, const CompensatedVector& y_k,
                                       double nabla) {
  if (!(nabla > 0.0)) throw std::invalid_argument("build_refining_problem: nabla must be positive");
  if (y_k.hi.size() != inst.m()) throw DimensionError("build_refining_problem: y has wrong length");
  const VectorXd s_k = compensated_slack(inst.A, inst.c, y_k);
  if (!positive(s_k)) {
    throw CannotRefineError("build_refining_problem: c - A^T y has a nonpositive component");
  }
  RefiningProblem out;
  out.instance.name = inst.name + "-refine";
  out.instance.A = inst.A;
  out.instance.b = inst.b;
  out.instance.c = nabla * s_k;
  out.instance.integer_data = false;
  out.start.y = VectorXd::Zero(inst.m());
  out.start.s = out.instance.c;
  out.start.mu = 0.0;
  out.start.drift = VectorXd::Zero(inst.n());
  return out;
}

CenteredStart center_start(const LpInstance& inst, const DualIterate& start, int max_steps,
                           const VectorXd* primal_hint, double target) {
  if (!positive(start.s)) throw InteriorViolationError("center_start: start is not interior");
  CenteredStart out;
  out.iterate = start;
  if (out.iterate.y.size() != inst.m()) out.iterate.y = VectorXd::Zero(inst.m());
  if (out.iterate.drift.size() != inst.n()) {
    out.iterate.drift = dual_residual(inst, out.iterate.y, out.iterate.s);
  }
  if (!(out.iterate.mu > 0.0)) out.iterate.mu = initial_mu(inst, start.s, primal_hint);

  std::vector<double> history;
  DualNewtonDirection dir = exact_dual_newton(inst.A, inst.b, out.iterate.s, out.iterate.mu);
  history.push_back(dir.delta);
  while (dir.delta > target) {
    if (out.steps >= max_steps) {
      std::ostringstream os;
      os << "center_start: proximity " << dir.delta << " still above " << target << " after "
         << max_steps << " damped Newton steps";
      throw CenteringFailureError(os.str(), history);
    }
    const double alpha = 1.0 / (1.0 + dir.delta);
    out.iterate.y += alpha * dir.dy;
    out.iterate.s += alpha * dir.ds;
    ++out.steps;
    dir = exact_dual_newton(inst.A, inst.b, out.iterate.s, out.iterate.mu);
    history.push_back(dir.delta);
  }
  out.iterate.drift = dual_residual(inst, out.iterate.y, out.iterate.s);
  out.delta = dir.delta;
  return out;
}

IrResult ir_ae_qipm(const LpInstance& inst, const DualIterate& start, const IrConfig& config,
                    const NoiseModel& noise) {
  const int stages = refinement_stage_count(config.zeta, config.zeta_tilde);
  if (start.y.size() != inst.m() || start.s.size() != inst.n()) {
    throw DimensionError("ir_ae_qipm: start has wrong dimensions");
  }
  const Index n = inst.n();

  IrResult result;
  RefinementState& state = result.state;
  state.zeta = config.zeta;
  state.zeta_tilde = config.zeta_tilde;
  state.ledger = CostLedger(noise.query_constant);
  state.y_acc = CompensatedVector(start.y);

  VectorXd hint;
  double last_mu = start.mu;
  for (int k = 0; k < stages; ++k) {
    const double nabla = nabla_power(config.zeta_tilde, k);
    StageReport report;
    report.stage = k;
    report.nabla_exponent = k;
    try {
      RefiningProblem rp = build_refining_problem(inst, state.y_acc, nabla);
      if (k == 0) rp.start.mu = start.mu;
      const CenteredStart centered =
          center_start(rp.instance, rp.start, config.center_max_steps,
                       hint.size() == n ? &hint : nullptr, config.center_target);
      report.center_steps = centered.steps;
      report.gap_before = gap_bound(n, centered.iterate.mu, centered.delta) / nabla;

      IpmConfig stage_cfg = config.ipm;
      stage_cfg.gap_target = config.zeta_tilde;
      stage_cfg.mu_min = config.zeta_tilde / (4.0 * static_cast<double>(n));
      NoiseModel stage_noise = noise;
      stage_noise.seed = noise.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k);
      IpmResult run = ae_qipm_solve(rp.instance, centered.iterate, stage_cfg, stage_noise);

      VectorXd y_hat = run.iterate.y;
      const VectorXd drift = dual_residual(rp.instance, run.iterate.y, run.iterate.s);
      const double c_scale = std::max(1.0, rp.instance.c.cwiseAbs().maxCoeff());
      if (drift.cwiseAbs().maxCoeff() > kProjectionTolerance * c_scale) {
        // Relative weights: the projection then moves every slack by a small
        // fraction of itself, so the small slacks stay positive.
        const VectorXd w = run.iterate.s.cwiseInverse();
        y_hat = project_dual(rp.instance, run.iterate.s, &w).y;
        report.projected = true;
      }

      const DualNewtonDirection dir =
          exact_dual_newton(rp.instance.A, rp.instance.b, run.iterate.s, run.iterate.mu);
      hint = primal_estimate(rp.instance, run.iterate, dir.ds);

      state.y_acc.add(y_hat / nabla);
      last_mu = run.iterate.mu / nabla;
      report.gap_after = gap_bound(n, run.iterate.mu, run.trace.final_delta) / nabla;
      report.dual_objective = compensated_dot(inst.b, state.y_acc);
      report.ipm_iterations = run.trace.iterations();
      for (const auto& rec : run.trace.records) {
        if (std::isnan(rec.cond)) continue;
        if (report.kappa0 == 0.0) report.kappa0 = rec.cond;
        report.max_cond = std::max(report.max_cond, rec.cond);
      }
      report.qram_queries = run.trace.ledger.qram_queries();
      report.classical_ops = run.trace.ledger.classical_ops();
      state.ledger += run.trace.ledger;
      report.trace = std::move(run.trace);
    } catch (const StageFailureError&) {
      throw;
    } catch (const Error& e) {
      std::ostringstream os;
      os << "ir_ae_qipm: stage " << k << " failed: " << e.what();
      throw StageFailureError(os.str(), k);
    }
    state.stage_reports.push_back(std::move(report));
    state.stage = k + 1;
    state.nabla_exponent = k + 1;
  }

  result.iterate.y = state.y_acc.value();
  result.iterate.s = compensated_slack(inst.A, inst.c, state.y_acc);
  result.iterate.mu = last_mu;
  result.iterate.drift = dual_residual(inst, result.iterate.y, result.iterate.s);
  result.primal = hint;
  return result;
}

std::string RefinementState::report_json() const {
  nlohmann::json j;
  j["zeta"] = zeta;
  j["zeta_tilde"] = zeta_tilde;
  j["stages_completed"] = stage;
  j["nabla_exponent"] = nabla_exponent;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : stage_reports) {
    rows.push_back({{"stage", r.stage},
                    {"nabla_exponent", r.nabla_exponent},
                    {"gap_before", r.gap_before},
                    {"gap_after", r.gap_after},
                    {"dual_objective", r.dual_objective},
                    {"center_steps", r.center_steps},
                    {"ipm_iterations", r.ipm_iterations},
                    {"kappa0", r.kappa0},
                    {"max_cond", r.max_cond},
                    {"projected", r.projected},
                    {"qram_queries", r.qram_queries},
                    {"classical_ops", r.classical_ops}});
  }
  j["stages"] = std::move(rows);
  j["qram_queries_modeled"] = ledger.qram_queries();
  j["classical_ops_measured"] = ledger.classical_ops();
  return j.dump(2);
}

}  // namespace qipm
