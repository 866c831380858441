#pragma once

#include <memory>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "elastmatch/meshing.hpp"

namespace elastmatch {

struct ElasticParams {
  double mu = 1.0;
  double lambda = 0.0;
};

struct DegenerateTriangle : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularInterior : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear elastic stiffness matrix on system dofs: boundary nodes first in
// boundary_loop order, then interior nodes; components interleaved, so node
// n holds dofs (2n, 2n+1). Kernel = 2 translations + linearized rotation.
struct StiffnessMatrix {
  Eigen::SparseMatrix<double> A;  // 2N x 2N
  Eigen::SparseMatrix<double> A_BB, A_BI, A_IB, A_II;
  std::shared_ptr<const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> interior;
  int boundary_nodes = 0;
  int total_nodes = 0;

  int boundary_dofs() const { return 2 * boundary_nodes; }
  int interior_dofs() const { return 2 * (total_nodes - boundary_nodes); }
};

// Splits blocks and factors the interior. Throws SingularInterior if the
// interior block cannot be factored.
StiffnessMatrix make_stiffness(Eigen::SparseMatrix<double> A, int boundary_nodes);

// Assembles 2 mu <eps(u), eps(v)> + lambda (div u)(div v) over the mesh.
// Throws DegenerateTriangle if a triangle area falls below
// 1e-14 * (bbox diagonal)^2.
StiffnessMatrix assemble(const TriMesh& mesh, const NodeOrdering& ord,
                         const ElasticParams& params = {});

// Dense condensation of the stiffness onto the boundary dofs:
// S = A_BB - A_BI A_II^-1 A_IB. interior_map recovers u_I = interior_map u_B.
struct SchurOperator {
  Eigen::MatrixXd S;             // 2K x 2K, symmetric PSD
  Eigen::MatrixXd interior_map;  // 2(N-K) x 2K
  int boundary_nodes = 0;

  // rows of S producing the force on boundary node i
  Eigen::MatrixXd node_rows(int i) const { return S.middleRows(2 * i, 2); }
};

SchurOperator schur_condense(const StiffnessMatrix& A);

// u_I = -A_II^-1 A_IB u_B (zero-force extension of boundary displacements)
Eigen::VectorXd recover_interior(const StiffnessMatrix& A, const Eigen::VectorXd& u_B);

// f = S u_B, interleaved per boundary node
Eigen::VectorXd boundary_forces(const SchurOperator& S, const Eigen::VectorXd& u_B);

}  // namespace elastmatch
