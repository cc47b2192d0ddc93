#pragma once

// Experiment harness: cost-scaling study, condition-number study and SVG plots.
//
// Quantum costs are always model-composed (query formula x measured event
// counts); classical costs are measured operation counts. Reports say so.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qipm/lp_core.hpp"
#include "qipm/qsim.hpp"
#include "qipm/refine.hpp"

namespace qipm {

inline constexpr const char* kCostBanner =
    "qram_queries are MODELED (query formula x measured event counts); "
    "classical_ops and iteration counts are MEASURED";

struct ScalingConfig {
  std::vector<Index> n_list{16, 32, 64, 128, 256};
  double m_ratio = 0.5;
  std::vector<std::uint64_t> seeds{1};
  bool degenerate = false;
  IrConfig ir;
  NoiseModel noise;
  bool parallel = true;
};

struct ScalingRow {
  Index n = 0;
  Index m = 0;
  std::uint64_t seed = 0;
  std::string mode;  // "quantum" or "cg"
  bool ok = false;
  std::string failure;
  int stages = 0;
  int ipm_iterations = 0;
  std::int64_t inner_iterations = 0;
  double qram_queries_modeled = 0.0;  // ledger re-evaluated with kappa = ||A||_F = 1
  std::int64_t classical_ops_measured = 0;
  double dual_gap = 0.0;     // |b^T y - opt_value|
  double wall_seconds = 0.0;  // kept out of the deterministic CSV
};

struct SlopeFit {
  std::string mode;
  std::string metric;
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  std::vector<SlopeFit> fits;

  std::string to_csv() const;         // deterministic
  std::string fits_csv() const;       // deterministic
  std::string timings_csv() const;    // wall-clock, not reproducible
  const SlopeFit* fit(const std::string& mode, const std::string& metric) const;
  bool any_failure() const;
};

/// Least-squares slope of log(y) against log(x).
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Runs ir_ae_qipm in quantum-emulated and CG-baseline mode for every
/// (n, seed) and fits log-log slopes of ipm_iterations, inner_iterations,
/// qram_queries_modeled and classical_ops_measured against n, excluding the
/// smallest n. Failed runs are kept in the report and left out of the fits.
ScalingReport run_scaling_study(const ScalingConfig& config);

struct CondnumConfig {
  InstanceSpec spec{16, 8, true, 1, 10, 1.0};
  double gap = 1e-8;
  double zeta_tilde = 1e-2;
  IpmConfig ipm;
  NoiseModel noise;
};

struct CondnumRow {
  std::string run;  // "single" or "refined"
  int stage = 0;
  int iter = 0;     // global iteration index within the run
  double mu = 0.0;  // in the units of the problem being solved
  double cond = 0.0;
};

struct CondnumReport {
  std::vector<CondnumRow> rows;
  double single_first = 0.0;
  double single_last = 0.0;
  double refined_kappa0 = 0.0;
  double refined_max = 0.0;
  int refined_stages = 0;
  std::string single_failure;  // empty unless run (a) raised
  std::string refined_failure;

  bool ok() const { return single_failure.empty() && refined_failure.empty(); }

  double single_growth() const { return single_last / single_first; }
  double refined_ratio() const { return refined_max / refined_kappa0; }
  std::string to_csv() const;
  std::string summary_json() const;
};

/// (a) one ae_qipm run to `gap`, (b) ir_ae_qipm with zeta_tilde to the same
/// gap; condition numbers of the (Jacobi-scaled) Newton matrix per iteration.
/// A run that raises is recorded in the report rather than rethrown.
CondnumReport run_condnum_study(const CondnumConfig& config);

enum class PlotKind { line, loglog };

PlotKind parse_plot_kind(const std::string& name);

struct PlotSpec {
  PlotKind kind = PlotKind::line;
  std::string x;
  std::vector<std::string> y;  // one series per column
  std::string group;           // optional: split each series by this column's value
  std::string title;
};

/// Renders CSV text to SVG text. Deterministic for identical input; throws
/// std::invalid_argument on an unknown column.
std::string render_plot(const std::string& csv, const PlotSpec& spec);
void emit_plot(const std::filesystem::path& csv_path, const PlotSpec& spec,
               const std::filesystem::path& svg_path);

}  // namespace qipm
