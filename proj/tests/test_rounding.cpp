#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "fixtures.hpp"
#include "qipm/errors.hpp"
#include "qipm/ipm.hpp"
#include "qipm/rounding.hpp"

using namespace qipm;
using qipm::test::tiny_lp;

namespace {

struct NearOptimal {
  VectorXd x;
  VectorXd y;
  VectorXd s;
};

NearOptimal solve_to_gap(const GeneratedInstance& gen, double gap) {
  IpmConfig cfg;
  cfg.mu_min = 1e-300;
  cfg.gap_target = gap;
  cfg.track_condition = false;
  const IpmResult res = ae_qipm_solve(gen.instance, gen.start, cfg, NoiseModel{});
  const auto dir = exact_dual_newton(gen.instance.A, gen.instance.b, res.iterate.s, res.iterate.mu);
  return {primal_estimate(gen.instance, res.iterate, dir.ds), res.iterate.y, res.iterate.s};
}

}  // namespace

TEST_SUITE("rounding") {
  TEST_CASE("identify_partition with explicit thresholds") {
    const Partition a = identify_partition(VectorXd{{1.0, 0.0}}, VectorXd{{0.0, 1.0}}, 0.5);
    CHECK(a.B == std::vector<Index>{0});
    CHECK(a.N == std::vector<Index>{1});
    CHECK(a.undecided.empty());

    const Partition b = identify_partition(VectorXd{{1e-9, 1.0}}, VectorXd{{1.0, 1e-9}}, 1e-4);
    CHECK(b.B == std::vector<Index>{1});
    CHECK(b.N == std::vector<Index>{0});
  }

  TEST_CASE("identify_partition flags undecided indices and clips tiny negatives") {
    const Partition p =
        identify_partition(VectorXd{{1.0, 1.0, 0.0}}, VectorXd{{1.0, 0.0, -1e-13}}, 0.5);
    CHECK(p.undecided == std::vector<Index>{0, 2});
    CHECK(p.B == std::vector<Index>{1});
    CHECK_THROWS_AS(identify_partition(VectorXd{{-1e-6}}, VectorXd{{1.0}}, 0.5),
                    std::invalid_argument);
  }

  TEST_CASE("identify_partition default threshold is the geometric mean gap") {
    // x^T s / n = 1e-4, so tau = 1e-2
    const Partition p = identify_partition(VectorXd{{2e-4, 1.0}}, VectorXd{{1.0, 0.0}}, 0.0);
    CHECK(p.B == std::vector<Index>{1});
    CHECK(p.N == std::vector<Index>{0});
  }

  TEST_CASE("crossover on the two-variable example") {
    const LpInstance inst = tiny_lp();
    Partition p;
    p.B = {0};
    p.N = {1};
    const OptimalSolution sol =
        crossover(inst, p, VectorXd{{0.99, 0.01}}, VectorXd::Constant(1, 0.97));
    CHECK(sol.x[0] == doctest::Approx(1.0));
    CHECK(sol.x[1] == 0.0);
    CHECK(sol.y[0] == doctest::Approx(1.0));
    CHECK(sol.s[0] == doctest::Approx(0.0));
    CHECK(sol.s[1] == doctest::Approx(1.0));
    CHECK(sol.primal_value == doctest::Approx(1.0));
    CHECK(sol.dual_value == doctest::Approx(1.0));
  }

  TEST_CASE("crossover rejects the wrong partition") {
    const LpInstance inst = tiny_lp();
    Partition wrong;
    wrong.B = {1};
    wrong.N = {0};
    CHECK_THROWS_AS(crossover(inst, wrong, VectorXd{{0.99, 0.01}}, VectorXd::Constant(1, 0.97)),
                    WrongPartitionError);
    Partition undecided;
    undecided.B = {0};
    undecided.undecided = {1};
    CHECK_THROWS_AS(crossover(inst, undecided, VectorXd{{0.99, 0.01}}, VectorXd::Constant(1, 0.97)),
                    std::invalid_argument);
  }

  TEST_CASE("crossover fixes a certificate") {
    for (bool degenerate : {false, true}) {
      const auto gen = test::generated(16, 2, degenerate);
      Partition p;
      p.B = gen.certificate.partition_B;
      p.N = gen.certificate.partition_N;
      const OptimalSolution sol = crossover(gen.instance, p, gen.certificate.x_star,
                                            gen.certificate.y_star);
      CHECK((sol.x - gen.certificate.x_star).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((sol.y - gen.certificate.y_star).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("crossover is invariant to the anchor within a partition") {
    const auto gen = test::generated(20, 6);
    Partition p;
    p.B = gen.certificate.partition_B;
    p.N = gen.certificate.partition_N;
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 1e-3);
    const OptimalSolution ref = crossover(gen.instance, p, gen.certificate.x_star,
                                          gen.certificate.y_star);
    for (int k = 0; k < 10; ++k) {
      VectorXd x = gen.certificate.x_star;
      VectorXd y = gen.certificate.y_star;
      for (Index i = 0; i < x.size(); ++i) x[i] += g(rng);
      for (Index i = 0; i < y.size(); ++i) y[i] += g(rng);
      const OptimalSolution sol = crossover(gen.instance, p, x, y);
      CHECK((sol.x - ref.x).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((sol.y - ref.y).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  TEST_CASE("near-optimal iterates round to the certificate") {
    for (bool degenerate : {false, true}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto gen = test::generated(24, seed, degenerate);
        const NearOptimal near = solve_to_gap(gen, 1e-8);
        const Partition p = identify_partition(near.x, near.s);
        CAPTURE(seed);
        CAPTURE(degenerate);
        CHECK(p.undecided.empty());
        CHECK(p.B == gen.certificate.partition_B);
        CHECK(p.N == gen.certificate.partition_N);
        const OptimalSolution sol = crossover(gen.instance, p, near.x, near.y);
        CHECK(sol.kkt_error <= 1e-10);
        CHECK(std::fabs(sol.dual_value - gen.certificate.opt_value) <= 1e-10);
        CHECK(std::fabs(sol.primal_value - gen.certificate.opt_value) <= 1e-10);
      }
    }
  }
}
