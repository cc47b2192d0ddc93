#include "qipm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qipm/errors.hpp"

namespace qipm {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, Index n, int mode) {
  return seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(n) * 1315423911ULL +
         static_cast<std::uint64_t>(mode);
}

ScalingRow run_one(const ScalingConfig& config, Index n, std::uint64_t seed, SolverKind solver) {
  ScalingRow row;
  row.n = n;
  row.m = std::max<Index>(1, static_cast<Index>(std::llround(config.m_ratio * static_cast<double>(n))));
  row.seed = seed;
  row.mode = to_string(solver);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    InstanceSpec spec;
    spec.n = n;
    spec.m = row.m;
    spec.degenerate = config.degenerate;
    spec.seed = seed;
    const GeneratedInstance gen = generate_instance(spec);

    IrConfig ir = config.ir;
    ir.ipm.solver = solver;
    ir.ipm.track_condition = false;
    NoiseModel noise = config.noise;
    noise.seed = mix_seed(config.noise.seed + seed, n, static_cast<int>(solver));
    const IrResult res = ir_ae_qipm(gen.instance, gen.start, ir, noise);

    row.stages = res.state.stage;
    for (const auto& st : res.state.stage_reports) {
      row.ipm_iterations += st.ipm_iterations;
      for (const auto& rec : st.trace.records) row.inner_iterations += rec.inner_iterations;
    }
    row.qram_queries_modeled =
        ledger_report(res.state.ledger, static_cast<double>(n), 1.0, 1.0).qram_queries_modeled;
    row.classical_ops_measured = res.state.ledger.classical_ops();
    row.dual_gap = std::abs(compensated_dot(gen.instance.b, res.state.y_acc) -
                            gen.certificate.opt_value);
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.failure = e.what();
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::string csv_escape(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += (ch == '\n' ? ' ' : ch);
  }
  return out + "\"";
}

}  // namespace

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: length mismatch");
  SlopeFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++k;
  }
  fit.points = k;
  const double denom = k * sxx - sx * sx;
  if (k < 2 || denom <= 0.0) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.intercept = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  fit.slope = (k * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / k;
  return fit;
}

ScalingReport run_scaling_study(const ScalingConfig& config) {
  if (config.n_list.empty()) throw std::invalid_argument("run_scaling_study: empty n list");
  if (!std::is_sorted(config.n_list.begin(), config.n_list.end())) {
    throw std::invalid_argument("run_scaling_study: n list must be ascending");
  }
  const SolverKind modes[] = {SolverKind::quantum_emulated, SolverKind::cg_baseline};

  ScalingReport report;
  std::vector<std::future<ScalingRow>> pending;
  for (Index n : config.n_list) {
    for (std::uint64_t seed : config.seeds) {
      for (SolverKind mode : modes) {
        const auto policy = config.parallel ? std::launch::async : std::launch::deferred;
        pending.push_back(std::async(policy, run_one, std::cref(config), n, seed, mode));
      }
    }
  }
  for (auto& f : pending) report.rows.push_back(f.get());

  const Index smallest = config.n_list.front();
  const char* metrics[] = {"ipm_iterations", "inner_iterations", "qram_queries_modeled",
                           "classical_ops_measured"};
  for (SolverKind mode : modes) {
    for (const char* metric : metrics) {
      std::vector<double> xs, ys;
      for (const auto& r : report.rows) {
        if (!r.ok || r.mode != to_string(mode) || r.n == smallest) continue;
        const std::string m = metric;
        double v = 0.0;
        if (m == "ipm_iterations") v = r.ipm_iterations;
        if (m == "inner_iterations") v = static_cast<double>(r.inner_iterations);
        if (m == "qram_queries_modeled") v = r.qram_queries_modeled;
        if (m == "classical_ops_measured") v = static_cast<double>(r.classical_ops_measured);
        xs.push_back(static_cast<double>(r.n));
        ys.push_back(v);
      }
      SlopeFit fit = fit_loglog(xs, ys);
      fit.mode = to_string(mode);
      fit.metric = metric;
      report.fits.push_back(fit);
    }
  }
  return report;
}

std::string ScalingReport::to_csv() const {
  std::ostringstream os;
  os << "n,m,seed,mode,ok,stages,ipm_iterations,inner_iterations,qram_queries_modeled,"
        "classical_ops_measured,dual_gap,failure\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.m << ',' << r.seed << ',' << r.mode << ',' << (r.ok ? 1 : 0) << ','
       << r.stages << ',' << r.ipm_iterations << ',' << r.inner_iterations << ','
       << fmt(r.qram_queries_modeled) << ',' << r.classical_ops_measured << ','
       << fmt(r.dual_gap) << ',' << csv_escape(r.failure) << '\n';
  }
  return os.str();
}

std::string ScalingReport::fits_csv() const {
  std::ostringstream os;
  os << "mode,metric,slope,intercept,points\n";
  for (const auto& f : fits) {
    os << f.mode << ',' << f.metric << ',' << fmt(f.slope) << ',' << fmt(f.intercept) << ','
       << f.points << '\n';
  }
  return os.str();
}

std::string ScalingReport::timings_csv() const {
  std::ostringstream os;
  os << "n,seed,mode,wall_seconds\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.seed << ',' << r.mode << ',' << fmt(r.wall_seconds) << '\n';
  }
  return os.str();
}

const SlopeFit* ScalingReport::fit(const std::string& mode, const std::string& metric) const {
  for (const auto& f : fits) {
    if (f.mode == mode && f.metric == metric) return &f;
  }
  return nullptr;
}

bool ScalingReport::any_failure() const {
  return std::any_of(rows.begin(), rows.end(), [](const ScalingRow& r) { return !r.ok; });
}

CondnumReport run_condnum_study(const CondnumConfig& config) {
  const GeneratedInstance gen = generate_instance(config.spec);
  const Index n = gen.instance.n();
  CondnumReport report;

  IpmConfig single = config.ipm;
  single.track_condition = true;
  single.gap_target = config.gap;
  single.mu_min = config.gap / (4.0 * static_cast<double>(n));
  try {
    const IpmResult a = ae_qipm_solve(gen.instance, gen.start, single, config.noise);
    for (const auto& rec : a.trace.records) {
      if (std::isnan(rec.cond)) continue;
      if (report.single_first == 0.0) report.single_first = rec.cond;
      report.single_last = rec.cond;
      report.rows.push_back({"single", 0, rec.iter, rec.mu, rec.cond});
    }
  } catch (const Error& e) {
    report.single_failure = e.what();
  }

  IrConfig ir;
  ir.zeta = config.gap;
  ir.zeta_tilde = config.zeta_tilde;
  ir.ipm = config.ipm;
  ir.ipm.track_condition = true;
  try {
    const IrResult b = ir_ae_qipm(gen.instance, gen.start, ir, config.noise);
    report.refined_stages = b.state.stage;
    int global = 0;
    for (const auto& st : b.state.stage_reports) {
      for (const auto& rec : st.trace.records) {
        if (!std::isnan(rec.cond)) {
          if (report.refined_kappa0 == 0.0) report.refined_kappa0 = rec.cond;
          report.refined_max = std::max(report.refined_max, rec.cond);
          report.rows.push_back({"refined", st.stage, global, rec.mu, rec.cond});
        }
        ++global;
      }
    }
  } catch (const Error& e) {
    report.refined_failure = e.what();
  }
  return report;
}

std::string CondnumReport::to_csv() const {
  std::ostringstream os;
  os << "run,stage,iter,mu,cond_M\n";
  for (const auto& r : rows) {
    os << r.run << ',' << r.stage << ',' << r.iter << ',' << fmt(r.mu) << ',' << fmt(r.cond)
       << '\n';
  }
  return os.str();
}

std::string CondnumReport::summary_json() const {
  nlohmann::json j;
  j["single_first"] = single_first;
  j["single_last"] = single_last;
  j["single_growth"] = single_growth();
  j["refined_kappa0"] = refined_kappa0;
  j["refined_max"] = refined_max;
  j["refined_ratio"] = refined_ratio();
  j["refined_stages"] = refined_stages;
  if (!single_failure.empty()) j["single_failure"] = single_failure;
  if (!refined_failure.empty()) j["refined_failure"] = refined_failure;
  return j.dump(2);
}

}  // namespace qipm
