// qipm: command-line front end.
//
// Exit codes: 0 success, 1 solver or data error, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qipm/bench.hpp"
#include "qipm/errors.hpp"
#include "qipm/ipm.hpp"
#include "qipm/lp_core.hpp"
#include "qipm/qsim.hpp"
#include "qipm/refine.hpp"
#include "qipm/rounding.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qipm;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> to_vec(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

VectorXd from_json(const json& j, const char* key) {
  const auto values = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw MalformedInstanceError(path.string() + ": " + e.what());
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("QIPM_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw UsageError(std::string("QIPM_SEED: not an unsigned integer: ") + env);
    }
  }
  return 0;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw UsageError(std::string(flag) + ": bad list entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

DualIterate start_for(const LpInstance& inst) {
  if (inst.start) return *inst.start;
  if ((inst.c.array() > 0.0).all()) {
    DualIterate it;
    it.y = VectorXd::Zero(inst.m());
    it.s = inst.c;
    return center_start(inst, it, 50).iterate;
  }
  throw InteriorViolationError("instance has no start iterate and c is not strictly positive");
}

struct SolveFlags {
  std::string instance;
  std::string solver = "exact";
  double theta = 0.0;
  double mu_min = 1e-8;
  double newton_tol = 1e-10;
  std::optional<std::uint64_t> seed;
  std::string trace;
  std::string out;
  double eps_tomo = 1e-2;
  double eps_norm = 1e-2;
  std::string noise_mode = "residual";
  bool no_cond = false;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("--instance", f.instance, "instance JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--solver", f.solver, "exact|quantum|cg")
      ->check(CLI::IsMember({"exact", "quantum", "cg"}));
  cmd->add_option("--theta", f.theta, "barrier reduction (default 1/(2 sqrt n))");
  cmd->add_option("--mu-min", f.mu_min, "stop once mu <= mu-min");
  cmd->add_option("--newton-tol", f.newton_tol, "inner solve tolerance");
  cmd->add_option("--seed", f.seed, "noise seed (fallback: QIPM_SEED)");
  cmd->add_option("--trace", f.trace, "per-iteration trace CSV");
  cmd->add_option("--out", f.out, "result JSON (default: stdout)");
  cmd->add_option("--eps-tomo", f.eps_tomo, "tomography error");
  cmd->add_option("--eps-norm", f.eps_norm, "norm-estimation error");
  cmd->add_option("--noise-mode", f.noise_mode, "residual|solution")
      ->check(CLI::IsMember({"residual", "solution"}));
  cmd->add_flag("--no-cond", f.no_cond, "skip condition-number tracking");
}

IpmConfig ipm_config(const SolveFlags& f) {
  IpmConfig cfg;
  cfg.theta = f.theta;
  cfg.mu_min = f.mu_min;
  cfg.newton_tol = f.newton_tol;
  cfg.solver = parse_solver_kind(f.solver);
  cfg.track_condition = !f.no_cond;
  return cfg;
}

NoiseModel noise_model(const SolveFlags& f) {
  NoiseModel nm;
  nm.eps_tomo = f.eps_tomo;
  nm.eps_norm = f.eps_norm;
  nm.mode = f.noise_mode == "solution" ? NoiseMode::solution_space : NoiseMode::residual_space;
  nm.seed = resolve_seed(f.seed);
  nm.validate();
  return nm;
}

json result_json(const LpInstance& inst, const DualIterate& it, const VectorXd& x,
                 const std::string& solver, const CostLedger& ledger) {
  json j;
  j["instance"] = inst.name;
  j["solver"] = solver;
  j["y"] = to_vec(it.y);
  j["s"] = to_vec(it.s);
  j["x"] = to_vec(x);
  j["mu"] = it.mu;
  j["dual_objective"] = inst.b.dot(it.y);
  j["dual_residual_inf"] = dual_residual(inst, it.y, it.s).cwiseAbs().maxCoeff();
  if (inst.certificate) j["opt_value"] = inst.certificate->opt_value;
  const LedgerReport report = ledger_report(ledger, static_cast<double>(inst.n()), 0.0, 0.0);
  j["cost"] = json::parse(report.to_json());
  return j;
}

void emit_result(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_text(out, j.dump(2) + "\n");
  }
}

int run_solve(const SolveFlags& f) {
  const LpInstance inst = load_instance(f.instance);
  const DualIterate start = start_for(inst);
  const IpmResult res = ae_qipm_solve(inst, start, ipm_config(f), noise_model(f));
  const DualNewtonDirection dir = exact_dual_newton(inst.A, inst.b, res.iterate.s, res.iterate.mu);
  const VectorXd x = primal_estimate(inst, res.iterate, dir.ds);
  json j = result_json(inst, res.iterate, x, f.solver, res.trace.ledger);
  j["iterations"] = res.trace.iterations();
  j["final_delta"] = res.trace.final_delta;
  j["gap_bound"] = gap_bound(inst.n(), res.iterate.mu, res.trace.final_delta);
  if (!f.trace.empty()) write_text(f.trace, res.trace.to_csv());
  emit_result(j, f.out);
  return 0;
}

int run_refine(const SolveFlags& f, double zeta, double zeta_tilde, const std::string& report) {
  const LpInstance inst = load_instance(f.instance);
  const DualIterate start = start_for(inst);
  IrConfig cfg;
  cfg.zeta = zeta;
  cfg.zeta_tilde = zeta_tilde;
  cfg.ipm = ipm_config(f);
  if (!(zeta > 0.0 && zeta_tilde < 1.0 && zeta <= zeta_tilde)) {
    throw UsageError("--zeta/--zeta-tilde: need 0 < zeta <= zeta-tilde < 1");
  }
  const IrResult res = ir_ae_qipm(inst, start, cfg, noise_model(f));
  json j = result_json(inst, res.iterate, res.primal, f.solver, res.state.ledger);
  j["dual_objective"] = compensated_dot(inst.b, res.state.y_acc);
  j["stages"] = res.state.stage;
  if (!report.empty()) write_text(report, res.state.report_json() + "\n");
  if (!f.trace.empty()) {
    std::ostringstream os;
    os << "stage,iter,mu,delta,drift_inf,cond_M,skipped,qram_queries,classical_ops\n";
    for (const auto& st : res.state.stage_reports) {
      std::istringstream lines(st.trace.to_csv());
      std::string line;
      std::getline(lines, line);  // header
      while (std::getline(lines, line)) os << st.stage << ',' << line << '\n';
    }
    write_text(f.trace, os.str());
  }
  emit_result(j, f.out);
  return 0;
}

int run_round(const std::string& instance, const std::string& result, double tau,
              const std::string& out) {
  const LpInstance inst = load_instance(instance);
  const json r = read_json(result);
  const VectorXd x = from_json(r, "x");
  const VectorXd y = from_json(r, "y");
  const VectorXd s = from_json(r, "s");
  if (x.size() != inst.n() || s.size() != inst.n() || y.size() != inst.m()) {
    throw DimensionError("result does not match the instance dimensions");
  }
  const Partition p = identify_partition(x, s, tau);
  json j;
  j["B"] = p.B;
  j["N"] = p.N;
  j["undecided"] = p.undecided;
  if (!p.undecided.empty()) {
    std::cerr << "round: " << p.undecided.size() << " undecided indices; try a different --tau\n";
    emit_result(j, out);
    return 1;
  }
  const OptimalSolution sol = crossover(inst, p, x, y);
  j["x"] = to_vec(sol.x);
  j["y"] = to_vec(sol.y);
  j["s"] = to_vec(sol.s);
  j["primal_value"] = sol.primal_value;
  j["dual_value"] = sol.dual_value;
  j["kkt_error"] = sol.kkt_error;
  emit_result(j, out);
  return 0;
}

std::vector<std::string> unparsed_arguments(const CLI::App& app) {
  std::vector<std::string> out = app.remaining();
  for (const CLI::App* sub : app.get_subcommands({})) {
    const auto more = unparsed_arguments(*sub);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Almost-exact quantum interior point method emulator for linear optimization"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a planted-certificate instance as JSON");
  InstanceSpec spec;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_out;
  gen->add_option("--n", spec.n, "columns")->check(CLI::PositiveNumber);
  gen->add_option("--m", spec.m, "rows")->check(CLI::PositiveNumber);
  gen->add_flag("--degenerate", spec.degenerate, "plant a degenerate optimal face");
  gen->add_option("--mu0", spec.mu0, "barrier value of the emitted start")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "generator seed (fallback: QIPM_SEED)");
  gen->add_option("--out", gen_out, "output path")->required();

  // solve / refine
  SolveFlags solve_flags;
  auto* solve = app.add_subcommand("solve", "run the almost-exact IPM on one instance");
  add_solve_flags(solve, solve_flags);

  SolveFlags refine_flags;
  double zeta = 1e-10;
  double zeta_tilde = 1e-2;
  std::string refine_report;
  auto* refine = app.add_subcommand("refine", "run the iteratively refined IPM");
  add_solve_flags(refine, refine_flags);
  refine->add_option("--zeta", zeta, "final accuracy");
  refine->add_option("--zeta-tilde", zeta_tilde, "per-stage accuracy");
  refine->add_option("--report", refine_report, "per-stage report JSON");

  // round
  std::string round_instance, round_result, round_out;
  double tau = 0.0;
  auto* round = app.add_subcommand("round", "identify the partition and cross over");
  round->add_option("--instance", round_instance)->required()->check(CLI::ExistingFile);
  round->add_option("--result", round_result, "solve/refine result JSON")
      ->required()
      ->check(CLI::ExistingFile);
  round->add_option("--tau", tau, "partition threshold (default sqrt(x^T s / n))");
  round->add_option("--out", round_out, "output JSON (default: stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "experiment harness");
  bench->require_subcommand(1);
  std::string n_list = "16,32,64,128,256";
  std::string seeds = "1";
  std::string out_dir = "bench_out";
  bool serial = false;
  double bench_zeta = 1e-6;
  auto* scaling = bench->add_subcommand("scaling", "cost scaling study");
  scaling->add_option("--n-list", n_list, "ascending sizes, comma separated");
  scaling->add_option("--seeds", seeds, "comma separated seeds");
  scaling->add_option("--out-dir", out_dir);
  scaling->add_option("--zeta", bench_zeta, "final accuracy of each run");
  scaling->add_flag("--serial", serial, "run sequentially");
  auto* condnum = bench->add_subcommand("condnum", "condition-number study");
  CondnumConfig cond_cfg;
  condnum->add_option("--n", cond_cfg.spec.n)->check(CLI::PositiveNumber);
  condnum->add_option("--m", cond_cfg.spec.m)->check(CLI::PositiveNumber);
  condnum->add_option("--seeds", seeds, "comma separated seeds");
  condnum->add_option("--gap", cond_cfg.gap, "target gap of both runs");
  condnum->add_option("--zeta-tilde", cond_cfg.zeta_tilde);
  condnum->add_option("--out-dir", out_dir);

  // report
  auto* report = app.add_subcommand("report", "render study output");
  report->require_subcommand(1);
  auto* plot = report->add_subcommand("plot", "CSV to SVG");
  std::string plot_csv, plot_out, plot_kind = "line", plot_y;
  PlotSpec plot_spec;
  plot->add_option("--csv", plot_csv)->required()->check(CLI::ExistingFile);
  plot->add_option("--x", plot_spec.x, "x column")->required();
  plot->add_option("--y", plot_y, "y columns, comma separated")->required();
  plot->add_option("--group", plot_spec.group, "split series by this column");
  plot->add_option("--kind", plot_kind)->check(CLI::IsMember({"line", "loglog"}));
  plot->add_option("--title", plot_spec.title);
  plot->add_option("--out", plot_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    // Name an unknown flag even when a missing required option was hit first.
    const std::vector<std::string> extras = unparsed_arguments(app);
    if (!extras.empty() && dynamic_cast<const CLI::ExtrasError*>(&e) == nullptr) {
      std::cerr << "usage error: unexpected argument";
      for (const auto& a : extras) std::cerr << ' ' << a;
      std::cerr << "\n";
    } else {
      std::cerr << "usage error: " << e.what() << "\n";
    }
    return 2;
  }

  try {
    if (*gen) {
      spec.seed = resolve_seed(gen_seed);
      if (spec.m > spec.n) throw UsageError("--m: must not exceed --n");
      const GeneratedInstance g = generate_instance(spec);
      save_instance(g.instance, gen_out);
      return 0;
    }
    if (*solve) return run_solve(solve_flags);
    if (*refine) return run_refine(refine_flags, zeta, zeta_tilde, refine_report);
    if (*round) return run_round(round_instance, round_result, tau, round_out);
    if (*scaling) {
      ScalingConfig cfg;
      cfg.n_list = parse_list<Index>(n_list, "--n-list");
      cfg.seeds = parse_list<std::uint64_t>(seeds, "--seeds");
      cfg.parallel = !serial;
      cfg.ir.zeta = bench_zeta;
      cfg.noise.seed = resolve_seed(std::nullopt);
      const ScalingReport rep = run_scaling_study(cfg);
      const fs::path dir(out_dir);
      write_text(dir / "scaling.csv", rep.to_csv());
      write_text(dir / "scaling_fits.csv", rep.fits_csv());
      write_text(dir / "scaling_timings.csv", rep.timings_csv());
      std::cout << kCostBanner << "\n" << rep.fits_csv();
      return rep.any_failure() ? 1 : 0;
    }
    if (*condnum) {
      const fs::path dir(out_dir);
      json summary = json::array();
      bool failed = false;
      for (std::uint64_t seed : parse_list<std::uint64_t>(seeds, "--seeds")) {
        cond_cfg.spec.seed = seed;
        cond_cfg.noise.seed = resolve_seed(std::nullopt);
        const CondnumReport rep = run_condnum_study(cond_cfg);
        write_text(dir / ("condnum_s" + std::to_string(seed) + ".csv"), rep.to_csv());
        json s = json::parse(rep.summary_json());
        s["seed"] = seed;
        summary.push_back(s);
        failed = failed || !rep.ok();
      }
      write_text(dir / "condnum_summary.json", summary.dump(2) + "\n");
      std::cout << summary.dump(2) << "\n";
      return failed ? 1 : 0;
    }
    if (*plot) {
      plot_spec.kind = parse_plot_kind(plot_kind);
      plot_spec.y = parse_list<std::string>(plot_y, "--y");
      emit_plot(plot_csv, plot_spec, plot_out);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
