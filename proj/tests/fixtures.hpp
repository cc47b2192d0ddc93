#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "qipm/lp_core.hpp"

namespace qipm::test {

// min x1 + 2 x2  s.t.  x1 + x2 = 1, x >= 0.  Optimum x = (1, 0), y = 1.
inline LpInstance tiny_lp() {
  LpInstance inst;
  inst.name = "tiny";
  inst.A = MatrixXd{{1.0, 1.0}};
  inst.b = VectorXd::Constant(1, 1.0);
  inst.c = VectorXd{{1.0, 2.0}};
  inst.integer_data = true;
  return inst;
}

inline DualIterate iterate(VectorXd y, VectorXd s, double mu) {
  DualIterate it;
  it.y = std::move(y);
  it.drift = VectorXd::Zero(s.size());
  it.s = std::move(s);
  it.mu = mu;
  return it;
}

inline GeneratedInstance generated(Index n, std::uint64_t seed, bool degenerate = false,
                                   double mu0 = 1.0) {
  InstanceSpec spec;
  spec.n = n;
  spec.m = n / 2;
  spec.seed = seed;
  spec.degenerate = degenerate;
  spec.mu0 = mu0;
  return generate_instance(spec);
}

}  // namespace qipm::test
