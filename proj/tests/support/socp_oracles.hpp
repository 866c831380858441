#pragma once

#include <random>

#include "elastmatch/conic.hpp"

namespace testsupport {

struct AdmmResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Independent reference solver for the same cone-program form: ADMM with a
// prefactored equality-constrained x-step and closed-form cone projections.
AdmmResult admm_solve(const elastmatch::ConicProgram& p, double rho = 1.0,
                      int max_iterations = 300000, double tol = 1e-9);

// Random instance with strictly feasible primal and dual points built in, so
// the optimum exists and strong duality holds. Objective is normalized to
// unit infinity-norm.
elastmatch::ConicProgram random_feasible_socp(std::mt19937& rng, int max_vars);

}  // namespace testsupport
