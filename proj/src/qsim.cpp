#include "qipm/qsim.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qipm/errors.hpp"

namespace qipm {

namespace {

// Precision that enters the query formulas. A noiseless emulation still
// stands for a primitive run at the default read-out precision.
constexpr double kDefaultPrecision = 1e-2;

double formula_eps(double eps) { return eps > 0.0 ? eps : kDefaultPrecision; }

}  // namespace

void NoiseModel::validate() const {
  for (double eps : {eps_tomo, eps_norm, eps_matvec}) {
    if (!(eps >= 0.0 && eps < 0.5)) {
      throw std::invalid_argument("NoiseModel: every epsilon must lie in [0, 0.5)");
    }
  }
  if (!(query_constant > 0.0)) throw std::invalid_argument("NoiseModel: query_constant must be > 0");
}

NoiseChannel::NoiseChannel(NoiseModel model) : model_(model), rng_(model.seed) { model_.validate(); }

double NoiseChannel::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng_);
}

VectorXd NoiseChannel::perturbation(Index size, double radius) {
  if (radius == 0.0 || size == 0) return VectorXd::Zero(size);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorXd v(size);
  for (Index i = 0; i < size; ++i) v[i] = gauss(rng_);
  const double norm = v.norm();
  if (norm == 0.0) return VectorXd::Zero(size);
  return v * (radius * uniform(0.0, 1.0) / norm);
}

double modeled_queries(const std::string& kind, const CostInputs& in, double query_constant) {
  if (kind == event_kind::inverse_tomography) {
    return query_constant * (in.dim / formula_eps(in.eps)) * in.kappa * in.frob_norm;
  }
  if (kind == event_kind::norm_estimation) {
    return query_constant * in.kappa * in.frob_norm;
  }
  if (kind == event_kind::matvec) {
    const double l = std::log2(std::max(2.0, in.dim / formula_eps(in.eps)));
    return query_constant * l * l;
  }
  throw std::invalid_argument("modeled_queries: unknown event kind '" + kind + "'");
}

void CostLedger::append(CostEvent ev) {
  if (!events_.empty()) {
    CostEvent& last = events_.back();
    if (last.kind == ev.kind && last.quantum == ev.quantum &&
        (!ev.quantum || last.inputs == ev.inputs)) {
      last.count += ev.count;
      return;
    }
  }
  events_.push_back(std::move(ev));
}

void CostLedger::record_quantum(const std::string& kind, const CostInputs& inputs,
                                std::int64_t count) {
  if (count <= 0) return;
  qram_queries_ += static_cast<double>(count) * modeled_queries(kind, inputs, query_constant_);
  append(CostEvent{kind, count, inputs, true});
}

void CostLedger::record_classical(const std::string& label, std::int64_t ops) {
  if (ops <= 0) return;
  classical_ops_ += ops;
  append(CostEvent{label, ops, CostInputs{}, false});
}

CostLedger& CostLedger::operator+=(const CostLedger& other) {
  if (other.query_constant_ != query_constant_) {
    throw std::invalid_argument("CostLedger: cannot merge ledgers with different query constants");
  }
  qram_queries_ += other.qram_queries_;
  classical_ops_ += other.classical_ops_;
  for (const auto& ev : other.events_) append(ev);
  return *this;
}

std::string CostLedger::to_json() const {
  nlohmann::json j;
  j["qram_queries"] = qram_queries_;
  j["classical_ops"] = classical_ops_;
  j["query_constant"] = query_constant_;
  nlohmann::json events = nlohmann::json::array();
  for (const auto& ev : events_) {
    nlohmann::json e{{"kind", ev.kind}, {"count", ev.count}, {"quantum", ev.quantum}};
    if (ev.quantum) {
      e["inputs"] = {{"n", ev.inputs.dim},
                     {"kappa", ev.inputs.kappa},
                     {"frob_norm", ev.inputs.frob_norm},
                     {"eps", ev.inputs.eps}};
    } else {
      e["inputs"] = nlohmann::json::object();
    }
    events.push_back(std::move(e));
  }
  j["events"] = std::move(events);
  return j.dump(2);
}

std::string LedgerReport::to_json() const {
  nlohmann::json j;
  j["qram_queries_modeled"] = qram_queries_modeled;
  j["classical_ops_measured"] = classical_ops_measured;
  j["n"] = n;
  j["note"] =
      "qram_queries_modeled = query formula x measured event counts (not measured); "
      "classical_ops_measured = counted arithmetic operations";
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& b : breakdown) {
    rows.push_back({{"kind", b.kind},
                    {"quantum", b.quantum},
                    {"count", b.count},
                    {"qram_queries_modeled", b.qram_queries},
                    {"classical_ops_measured", b.classical_ops}});
  }
  j["breakdown"] = std::move(rows);
  return j.dump(2);
}

LedgerReport ledger_report(const CostLedger& ledger, double n, double kappa, double frob_norm) {
  LedgerReport report;
  report.n = n;
  std::map<std::pair<bool, std::string>, LedgerBreakdown> rows;
  for (const auto& ev : ledger.events()) {
    auto& row = rows[{!ev.quantum, ev.kind}];
    row.kind = ev.kind;
    row.quantum = ev.quantum;
    row.count += ev.count;
    if (ev.quantum) {
      CostInputs in = ev.inputs;
      if (kappa > 0.0) in.kappa = kappa;
      if (frob_norm > 0.0) in.frob_norm = frob_norm;
      const double q =
          static_cast<double>(ev.count) * modeled_queries(ev.kind, in, ledger.query_constant());
      row.qram_queries += q;
      report.qram_queries_modeled += q;
    } else {
      row.classical_ops += ev.count;
      report.classical_ops_measured += ev.count;
    }
  }
  for (auto& [key, row] : rows) report.breakdown.push_back(row);
  return report;
}

UnitSolve noisy_unit_solve(const SymmetricFactorization& factor, const VectorXd& r,
                           NoiseChannel& noise, CostLedger* ledger, const CostInputs& cost) {
  const double r_norm = r.norm();
  if (!(r_norm > 0.0)) throw std::invalid_argument("noisy_unit_solve: residual must be nonzero");
  const NoiseModel& model = noise.model();
  const Index dim = r.size();
  const VectorXd r_unit = r / r_norm;

  UnitSolve out;
  if (model.mode == NoiseMode::solution_space) {
    const VectorXd p = factor.solve(r_unit);
    const double p_norm = p.norm();
    const VectorXd read = p + noise.perturbation(dim, model.eps_tomo * p_norm);
    out.direction = read / read.norm();
    out.norm_estimate =
        p_norm * (1.0 + (model.eps_norm > 0.0 ? noise.uniform(-model.eps_norm, model.eps_norm) : 0.0));
  } else {
    const VectorXd q = factor.solve(r_unit + noise.perturbation(dim, model.eps_tomo));
    out.norm_estimate = q.norm();
    out.direction = q / out.norm_estimate;
  }

  if (ledger != nullptr) {
    CostInputs in = cost;
    in.dim = static_cast<double>(dim);
    in.eps = model.eps_tomo;
    ledger->record_quantum(event_kind::inverse_tomography, in);
    ledger->record_quantum(event_kind::norm_estimation, in);
  }
  return out;
}

UnitSolve noisy_unit_solve(const SymmetricSystem& sys, const VectorXd& r, NoiseChannel& noise,
                           CostLedger* ledger, const CostInputs& cost) {
  return noisy_unit_solve(SymmetricFactorization(sys), r, noise, ledger, cost);
}

VectorXd quantum_matvec(const MatrixXd& M, const VectorXd& z, NoiseChannel& noise,
                        CostLedger* ledger) {
  if (M.cols() != z.size()) throw DimensionError("quantum_matvec: dimension mismatch");
  VectorXd out = M * z;
  const double eps = noise.model().eps_matvec;
  if (eps > 0.0) {
    for (Index i = 0; i < out.size(); ++i) out[i] *= 1.0 + noise.uniform(-eps, eps);
  }
  if (ledger != nullptr) {
    CostInputs in;
    in.dim = static_cast<double>(M.rows());
    in.eps = eps > 0.0 ? eps : noise.model().eps_tomo;
    ledger->record_quantum(event_kind::matvec, in);
  }
  return out;
}

LinearSolveReport refined_linear_solve(const SymmetricFactorization& factor,
                                       const VectorXd& sigma, NoiseChannel& noise,
                                       const RefinedSolveOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("refined_linear_solve: tol must be > 0");
  const MatrixXd& M = factor.system().matrix();
  const Index dim = M.rows();
  if (sigma.size() != dim) throw DimensionError("refined_linear_solve: rhs has wrong length");
  const NoiseModel& model = noise.model();

  LinearSolveReport report{VectorXd::Zero(dim), 0, {}, CostLedger(model.query_constant)};
  CostLedger& ledger = report.ledger_delta;
  CostInputs cost = options.cost;
  cost.dim = static_cast<double>(dim);

  const double m_norm = M.cwiseAbs().rowwise().sum().maxCoeff();
  const double sigma_norm = sigma.norm();
  const double eps_mach = std::numeric_limits<double>::epsilon();
  VectorXd& z = report.solution;

  VectorXd r = sigma - quantum_matvec(M, z, noise, &ledger);
  ledger.record_classical(event_kind::classical, dim);
  int non_decreasing = 0;

  for (;;) {
    const double res = r.norm();
    report.residual_history.push_back(res);
    const double floor = 8.0 * static_cast<double>(dim) * eps_mach * (m_norm * z.norm() + sigma_norm);
    if (res <= options.tol || res <= floor) break;

    const auto n_hist = report.residual_history.size();
    if (n_hist >= 2 && res >= report.residual_history[n_hist - 2]) {
      ++non_decreasing;
    } else {
      non_decreasing = 0;
    }
    if (non_decreasing >= 3 || report.iterations >= options.max_iterations) {
      double kappa = cost.kappa;
      if (dim <= kConditionNumberCap) kappa = condition_number(M);
      const double product = kappa * (model.eps_tomo + 2.0 * model.eps_norm);
      std::ostringstream os;
      os << "refined_linear_solve: residual stopped contracting after " << report.iterations
         << " iterations (||r|| = " << res << "); kappa * eps = " << product;
      throw DivergingSolverError(os.str(), product);
    }

    const UnitSolve unit = noisy_unit_solve(factor, r, noise, &ledger, cost);
    double r_estimate = res;
    if (model.mode == NoiseMode::solution_space && model.eps_norm > 0.0) {
      r_estimate *= 1.0 + noise.uniform(-model.eps_norm, model.eps_norm);
    }
    {
      CostInputs in = cost;
      in.eps = model.eps_tomo;
      ledger.record_quantum(event_kind::norm_estimation, in);
    }
    z += (r_estimate * unit.norm_estimate) * unit.direction;
    ledger.record_classical(event_kind::classical, 3 * dim);
    ++report.iterations;

    r = sigma - quantum_matvec(M, z, noise, &ledger);
    ledger.record_classical(event_kind::classical, dim);
  }
  return report;
}

LinearSolveReport refined_linear_solve(const SymmetricSystem& sys, const VectorXd& sigma,
                                       NoiseChannel& noise, const RefinedSolveOptions& options) {
  return refined_linear_solve(SymmetricFactorization(sys), sigma, noise, options);
}

}  // namespace qipm
