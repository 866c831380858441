#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "elastmatch/conic.hpp"
#include "support/socp_oracles.hpp"

using namespace elastmatch;
using Eigen::VectorXd;

TEST_CASE("norm epigraph of a constant vector") {
  ProgramBuilder pb;
  int t = pb.add_variables(1);
  pb.add_objective_term(t, 1.0);
  VectorXd v(2);
  v << 3.0, 4.0;
  pb.add_norm_epigraph(AffineExpr::constant(pb.variable_count(), v), t);
  ConicProgram p = pb.build();

  ConicSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[t] == doctest::Approx(5.0).epsilon(1e-7));
  CHECK(sol.primal_objective == doctest::Approx(5.0).epsilon(1e-7));
  // folded auxiliaries are reconstructed exactly
  CHECK(sol.x[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sol.x[2] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::abs(sol.gap) <= 1e-7);
}

TEST_CASE("squared-norm epigraph of constants") {
  {
    ProgramBuilder pb;
    int d = pb.add_variables(1);
    pb.add_objective_term(d, 1.0);
    pb.add_square_epigraph(AffineExpr::constant(1, VectorXd::Constant(1, 3.0)), d);
    ConicSolution sol = solve(pb.build());
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x[d] == doctest::Approx(9.0).epsilon(1e-7));
  }
  {
    ProgramBuilder pb;
    int d = pb.add_variables(1);
    pb.add_objective_term(d, 1.0);
    VectorXd v(2);
    v << 1.0, 1.0;
    pb.add_square_epigraph(AffineExpr::constant(1, v), d);
    ConicSolution sol = solve(pb.build());
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x[d] == doctest::Approx(2.0).epsilon(1e-7));
  }
}

TEST_CASE("minimum-norm point on a line") {
  // min ||(x1,x2)|| s.t. x1 + x2 = 1 has value sqrt(2)/2 at (1/2, 1/2)
  ProgramBuilder pb;
  int x = pb.add_variables(2);
  int t = pb.add_variables(1);
  pb.add_objective_term(t, 1.0);
  pb.add_norm_epigraph(AffineExpr::variables(pb.variable_count(), x, 2), t);
  AffineExpr sum;
  sum.A.resize(1, pb.variable_count());
  sum.A.insert(0, x) = 1.0;
  sum.A.insert(0, x + 1) = 1.0;
  sum.b = VectorXd::Constant(1, -1.0);
  pb.add_equality(sum);

  ConicSolution sol = solve(pb.build());
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.primal_objective == doctest::Approx(std::sqrt(0.5)).epsilon(1e-7));
  CHECK(sol.x[x] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sol.x[x + 1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(sol.primal_objective - sol.dual_objective) <= 1e-7);
}

TEST_CASE("pure equality problem and multiplier sign") {
  // min x s.t. x = 3: optimum 3 with multiplier y = -1 (c + G'y = 0)
  ProgramBuilder pb;
  int x = pb.add_variables(1);
  pb.add_objective_term(x, 1.0);
  AffineExpr eq;
  eq.A.resize(1, 1);
  eq.A.insert(0, 0) = 1.0;
  eq.b = VectorXd::Constant(1, -3.0);
  pb.add_equality(eq);

  ConicSolution sol = solve(pb.build());
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[x] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(sol.y[0] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("projection of a point onto a plane via squared distance") {
  VectorXd pt(3);
  pt << 0.3, -0.2, 1.4;
  ProgramBuilder pb;
  int x = pb.add_variables(3);
  int d = pb.add_variables(1);
  pb.add_objective_term(d, 1.0);
  AffineExpr diff = AffineExpr::variables(pb.variable_count(), x, 3);
  diff.b = -pt;
  pb.add_square_epigraph(diff, d);
  AffineExpr sum;
  sum.A.resize(1, pb.variable_count());
  for (int i = 0; i < 3; ++i) sum.A.insert(0, x + i) = 1.0;
  sum.b = VectorXd::Constant(1, -1.0);
  pb.add_equality(sum);

  ConicSolution sol = solve(pb.build());
  REQUIRE(sol.status == SolveStatus::Optimal);

  double shift = (1.0 - pt.sum()) / 3.0;
  for (int i = 0; i < 3; ++i) CHECK(sol.x[x + i] == doctest::Approx(pt[i] + shift).epsilon(1e-6));
  CHECK(sol.x[d] == doctest::Approx(3.0 * shift * shift).epsilon(1e-5));
}

TEST_CASE("infeasible problems are certified") {
  {
    // fully folded away: x >= 0 with x = -1
    ProgramBuilder pb;
    int x = pb.add_variables(1);
    pb.add_nonneg(x);
    AffineExpr eq;
    eq.A.resize(1, 1);
    eq.A.insert(0, 0) = 1.0;
    eq.b = VectorXd::Constant(1, 1.0);
    pb.add_equality(eq);
    ConicSolution sol = solve(pb.build());
    CHECK(sol.status == SolveStatus::Infeasible);
  }
  {
    // same conflict but with the variable kept in the cost
    ProgramBuilder pb;
    int x = pb.add_variables(1);
    pb.add_objective_term(x, 1.0);
    pb.add_nonneg(x);
    AffineExpr eq;
    eq.A.resize(1, 1);
    eq.A.insert(0, 0) = 1.0;
    eq.b = VectorXd::Constant(1, 1.0);
    pb.add_equality(eq);
    ConicSolution sol = solve(pb.build());
    CHECK(sol.status == SolveStatus::Infeasible);
  }
}

TEST_CASE("unbounded objective is certified") {
  // min x0 with x0 free and untouched by the single cone
  ConicProgram p;
  p.n = 3;
  p.c = VectorXd::Zero(3);
  p.c[0] = 1.0;
  p.G.resize(0, 3);
  p.soc_cones.push_back({2, 1});
  ConicSolution sol = solve(p);
  CHECK(sol.status == SolveStatus::Unbounded);
}

TEST_CASE("malformed programs are rejected") {
  ConicProgram p;
  p.n = 2;
  p.c = VectorXd::Zero(3);
  CHECK_THROWS_AS(p.validate(), DimensionMismatch);

  ConicProgram q;
  q.n = 2;
  q.c = VectorXd::Zero(2);
  q.G.resize(0, 2);
  q.soc_cones.push_back({0, 5});
  CHECK_THROWS_AS(q.validate(), DimensionMismatch);

  ConicProgram r;
  r.n = 2;
  r.c = VectorXd::Zero(2);
  r.G.resize(0, 2);
  r.soc_cones.push_back({0, 1});
  r.nonneg.push_back(1);
  CHECK_THROWS_AS(r.validate(), DimensionMismatch);
}

TEST_CASE("iteration limit reports honestly") {
  ProgramBuilder pb;
  int x = pb.add_variables(2);
  int t = pb.add_variables(1);
  pb.add_objective_term(t, 1.0);
  pb.add_norm_epigraph(AffineExpr::variables(pb.variable_count(), x, 2), t);
  AffineExpr sum;
  sum.A.resize(1, pb.variable_count());
  sum.A.insert(0, x) = 1.0;
  sum.b = VectorXd::Constant(1, -1.0);
  pb.add_equality(sum);
  SolverOptions opts;
  opts.max_iterations = 1;
  ConicSolution sol = solve(pb.build(), opts);
  CHECK(sol.status == SolveStatus::MaxIterations);
  CHECK(!sol.message.empty());
}

TEST_CASE("random feasible programs match the splitting-method oracle") {
  std::mt19937 rng(20240817u);
  int solved = 0;
  for (int trial = 0; trial < 12; ++trial) {
    ConicProgram p = testsupport::random_feasible_socp(rng, 30);
    ConicSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.gap <= 1e-8 * std::max(1.0, std::abs(sol.primal_objective)));
    CHECK(sol.primal_residual <= 1e-7);
    CHECK(sol.dual_residual <= 1e-7);

    testsupport::AdmmResult ref = testsupport::admm_solve(p);
    REQUIRE(ref.converged);
    CHECK(std::abs(sol.primal_objective - ref.objective) <=
          1e-4 * std::max(1.0, std::abs(ref.objective)));
    ++solved;
  }
  CHECK(solved == 12);
}

TEST_CASE("solves are deterministic") {
  std::mt19937 rng(7u);
  ConicProgram p = testsupport::random_feasible_socp(rng, 25);
  ConicSolution a = solve(p);
  ConicSolution b = solve(p);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(a.x.size() == b.x.size());
  for (long i = 0; i < a.x.size(); ++i) CHECK(a.x[i] == b.x[i]);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("program dump is readable text") {
  ProgramBuilder pb;
  int t = pb.add_variables(1);
  pb.add_objective_term(t, 1.0);
  VectorXd v(2);
  v << 3.0, 4.0;
  pb.add_norm_epigraph(AffineExpr::constant(pb.variable_count(), v), t);
  std::ostringstream os;
  dump_program(pb.build(), os);
  CHECK(os.str().find("variables: 3") != std::string::npos);
  CHECK(os.str().find("second-order cones") != std::string::npos);
}
