#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/LU>

#include "qipm/errors.hpp"
#include "qipm/lp_core.hpp"

namespace qipm {

namespace {

constexpr int kMaxResample = 1000;

struct Layout {
  std::vector<Index> basis;       // |B| = m, A_B nonsingular
  std::vector<Index> zero_block;  // x* = s* = 0 (degenerate variant only)
  std::vector<Index> nonbasis;    // s* > 0
};

Layout choose_layout(Index n, Index m, bool degenerate, std::mt19937_64& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  const Index zero_count = degenerate ? std::max<Index>(1, (n - m) / 4) : 0;
  Layout layout;
  layout.basis.assign(perm.begin(), perm.begin() + m);
  layout.zero_block.assign(perm.begin() + m, perm.begin() + m + zero_count);
  layout.nonbasis.assign(perm.begin() + m + zero_count, perm.end());
  std::sort(layout.basis.begin(), layout.basis.end());
  std::sort(layout.zero_block.begin(), layout.zero_block.end());
  std::sort(layout.nonbasis.begin(), layout.nonbasis.end());
  return layout;
}

MatrixXd columns(const MatrixXd& A, const std::vector<Index>& idx) {
  MatrixXd out(A.rows(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = A.col(idx[k]);
  return out;
}

// Random integer matrix whose basis block is nonsingular. In the degenerate
// variant each zero-block column is a 0/1 combination of basis columns: x*
// stays a vertex, but mass can move onto the zero block at no cost, so the
// optimal face has more than m positive coordinates.
MatrixXd sample_matrix(const InstanceSpec& spec, const Layout& layout, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> entry(-spec.entry_bound, spec.entry_bound);
  const Index m = spec.m;
  for (int attempt = 0; attempt < kMaxResample; ++attempt) {
    MatrixXd A(m, spec.n);
    for (Index j = 0; j < spec.n; ++j)
      for (Index i = 0; i < m; ++i) A(i, j) = entry(rng);

    const MatrixXd AB = columns(A, layout.basis);
    Eigen::FullPivLU<MatrixXd> lu(AB);
    if (lu.rank() < m || lu.rcond() < 1e-8) continue;

    bool ok = true;
    std::uniform_int_distribution<Index> pick(0, m - 1);
    for (Index j : layout.zero_block) {
      bool placed = false;
      for (int tries = 0; tries < 64 && !placed; ++tries) {
        VectorXd u = VectorXd::Zero(m);
        u[pick(rng)] = 1.0;
        if (m > 1 && tries % 2 == 0) u[pick(rng)] = 1.0;
        const VectorXd col = AB * u;
        if (col.cwiseAbs().maxCoeff() <= spec.entry_bound) {
          A.col(j) = col;
          placed = true;
        }
      }
      ok = ok && placed;
    }
    if (ok && full_row_rank(A)) return A;
  }
  throw Error("generate_instance: could not sample a well-conditioned basis");
}

// Damped dual Newton centering at fixed mu; converges from any strictly
// feasible dual point of a problem with bounded primal-dual optimal sets.
VectorXd center_dual(const MatrixXd& A, const VectorXd& b, const VectorXd& c, VectorXd y,
                     double mu) {
  for (int step = 0; step < 500; ++step) {
    const VectorXd s = c - A.transpose() * y;
    const auto dir = exact_dual_newton(A, b, s, mu);
    if (dir.delta < 1e-14) return y;
    const double alpha = dir.delta > 0.25 ? 1.0 / (1.0 + dir.delta) : 1.0;
    y += alpha * dir.dy;
    if (dir.delta < 1e-12 && alpha == 1.0) return y;
  }
  return y;
}

}  // namespace

GeneratedInstance generate_instance(const InstanceSpec& spec) {
  if (spec.m < 1 || spec.n < spec.m) {
    throw DimensionError("generate_instance: need n >= m >= 1");
  }
  if (spec.degenerate && spec.n == spec.m) {
    throw DimensionError("generate_instance: degenerate variant needs n > m");
  }
  if (!(spec.mu0 > 0.0)) throw Error("generate_instance: mu0 must be positive");

  std::mt19937_64 rng(spec.seed);
  const Layout layout = choose_layout(spec.n, spec.m, spec.degenerate, rng);
  const MatrixXd A = sample_matrix(spec, layout, rng);
  const MatrixXd AB = columns(A, layout.basis);

  std::uniform_int_distribution<int> positive(1, 10);
  std::uniform_int_distribution<int> dual_entry(-5, 5);

  // The zero block belongs to the optimal partition's B: some optimal x is
  // positive there (shift mass from the basis) while every optimal s is zero.
  std::vector<Index> optimal_B = layout.basis;
  optimal_B.insert(optimal_B.end(), layout.zero_block.begin(), layout.zero_block.end());
  std::sort(optimal_B.begin(), optimal_B.end());

  Certificate cert;
  cert.degenerate = spec.degenerate;
  cert.partition_B = optimal_B;
  cert.partition_N = layout.nonbasis;
  cert.x_star = VectorXd::Zero(spec.n);
  cert.s_star = VectorXd::Zero(spec.n);
  cert.y_star.resize(spec.m);
  for (Index j : layout.basis) cert.x_star[j] = positive(rng);
  for (Index i = 0; i < spec.m; ++i) cert.y_star[i] = dual_entry(rng);
  for (Index j : layout.nonbasis) cert.s_star[j] = positive(rng);

  LpInstance inst;
  {
    std::ostringstream os;
    os << "gen-n" << spec.n << "-m" << spec.m << "-s" << spec.seed
       << (spec.degenerate ? "-deg" : "");
    inst.name = os.str();
  }
  inst.A = A;
  inst.b = A * cert.x_star;
  inst.c = A.transpose() * cert.y_star + cert.s_star;
  inst.integer_data = true;
  cert.opt_value = inst.b.dot(cert.y_star);

  // Strictly feasible dual point: y = y* - w with A_B^T w = v > 0.
  Eigen::FullPivLU<MatrixXd> lu_t(AB.transpose());
  const VectorXd w_unit = lu_t.solve(VectorXd::Ones(spec.m));
  double t = 1.0;
  if (!layout.nonbasis.empty()) {
    double min_sn = std::numeric_limits<double>::infinity();
    double max_pull = 0.0;
    for (Index j : layout.nonbasis) {
      min_sn = std::min(min_sn, cert.s_star[j]);
      max_pull = std::max(max_pull, std::fabs(A.col(j).dot(w_unit)));
    }
    if (max_pull > 0.0) t = std::min(1.0, 0.5 * min_sn / max_pull);
  }
  const VectorXd y_feasible = cert.y_star - t * w_unit;

  const VectorXd y0 = center_dual(A, inst.b, inst.c, y_feasible, spec.mu0);
  DualIterate start;
  start.y = y0;
  start.s = inst.c - A.transpose() * y0;
  start.mu = spec.mu0;
  start.drift = VectorXd::Zero(spec.n);
  if ((start.s.array() <= 0.0).any()) {
    throw Error("generate_instance: centering left the dual interior");
  }
  const double delta = exact_dual_newton(A, inst.b, start.s, spec.mu0).delta;
  if (delta > 1e-10) {
    std::ostringstream os;
    os << "generate_instance: start proximity " << delta << " exceeds 1e-10";
    throw Error(os.str());
  }

  inst.certificate = cert;
  inst.start = start;
  return GeneratedInstance{inst, start, cert};
}

}  // namespace qipm
