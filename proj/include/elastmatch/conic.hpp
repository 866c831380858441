#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace elastmatch {

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// KKT factorization breakdown that regularization could not rescue.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// minimize c'x  subject to  G x = h,
//   x[cone] in a second-order cone (first index is the head) per entry of
//   soc_cones, x[i] >= 0 for i in nonneg, remaining variables free.
struct ConicProgram {
  int n = 0;
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd h;
  std::vector<std::vector<int>> soc_cones;
  std::vector<int> nonneg;

  void validate() const;  // throws DimensionMismatch
};

// Sparse affine expression rows b + A x over program variables.
struct AffineExpr {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;

  int rows() const { return static_cast<int>(b.size()); }

  static AffineExpr variables(int n_total, int first, int count);
  static AffineExpr constant(int n_total, const Eigen::VectorXd& values);
};

// Incremental construction of a ConicProgram. Affine cone arguments get
// definitional auxiliaries (one equality row each); the solver's presolve
// folds them back, so they cost nothing at solve time.
class ProgramBuilder {
 public:
  int add_variables(int count);
  void add_objective_term(int var, double coef);
  void add_nonneg(int var);
  // expr == 0
  void add_equality(const AffineExpr& expr);
  // t >= ||expr||
  void add_norm_epigraph(const AffineExpr& expr, int t);
  // bound >= ||expr||^2, encoded as ||(2 expr, bound-1)|| <= bound+1
  void add_square_epigraph(const AffineExpr& expr, int bound);
  // head_expr >= ||tail_expr|| with affine head
  void add_soc_constraint(const AffineExpr& head, const AffineExpr& tail);

  int variable_count() const { return n_; }
  ConicProgram build();

 private:
  // returns the first of `count` fresh auxiliaries defined by expr
  int define_aux(const AffineExpr& expr);

  int n_ = 0;
  std::vector<Eigen::Triplet<double>> g_;
  std::vector<double> h_;
  std::vector<std::pair<int, double>> cost_;
  std::vector<std::vector<int>> cones_;
  std::vector<int> nonneg_;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iterations = 100;
  bool verbose = false;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations, NumericalProblem };

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalProblem;
  Eigen::VectorXd x;  // full-length primal (auxiliaries reconstructed)
  Eigen::VectorXd y;  // equality multipliers
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;          // complementarity s'z of the returned point
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  std::string message;

  bool ok() const { return status == SolveStatus::Optimal; }
};

// Interior-point solve: homogeneous self-dual embedding with Nesterov-Todd
// scaling and a predictor-corrector step. Deterministic.
ConicSolution solve(const ConicProgram& program, const SolverOptions& opts = {});

// Plain-text dump for debugging solver inputs.
void dump_program(const ConicProgram& program, std::ostream& os);

}  // namespace elastmatch
