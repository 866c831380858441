#include "elastmatch/elasticity.hpp"

#include <vector>

namespace elastmatch {

StiffnessMatrix make_stiffness(Eigen::SparseMatrix<double> A, int boundary_nodes) {
  StiffnessMatrix s;
  s.total_nodes = static_cast<int>(A.rows()) / 2;
  s.boundary_nodes = boundary_nodes;
  const int nb = 2 * boundary_nodes;
  const int ni = static_cast<int>(A.rows()) - nb;
  s.A = std::move(A);
  s.A.makeCompressed();
  s.A_BB = s.A.topLeftCorner(nb, nb);
  s.A_BI = s.A.topRightCorner(nb, ni);
  s.A_IB = s.A.bottomLeftCorner(ni, nb);
  s.A_II = s.A.bottomRightCorner(ni, ni);
  if (ni > 0) {
    auto ldlt = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    ldlt->compute(s.A_II);
    if (ldlt->info() != Eigen::Success)
      throw SingularInterior("make_stiffness: interior block factorization failed");
    if ((ldlt->vectorD().array() <= 0.0).any())
      throw SingularInterior("make_stiffness: interior block is not positive definite");
    s.interior = std::move(ldlt);
  }
  return s;
}

StiffnessMatrix assemble(const TriMesh& mesh, const NodeOrdering& ord,
                         const ElasticParams& params) {
  const int n_dofs = 2 * mesh.node_count();
  const double mu = params.mu, lambda = params.lambda;

  Vec2 lo = mesh.nodes.front(), hi = lo;
  for (const Vec2& p : mesh.nodes) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double area_floor = 1e-14 * (hi - lo).squaredNorm();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(36 * mesh.triangle_count());
  for (const auto& t : mesh.triangles) {
    const Vec2& p0 = mesh.nodes[t[0]];
    const Vec2& p1 = mesh.nodes[t[1]];
    const Vec2& p2 = mesh.nodes[t[2]];
    const double area = triangle_area(p0, p1, p2);
    if (area <= area_floor)
      throw DegenerateTriangle("assemble: triangle area " + std::to_string(area) +
                               " below degeneracy floor");
    // P1 shape gradients: grad phi_m = rot90(p_{m+2} - p_{m+1}) / (2 area)
    const Vec2 e0 = p2 - p1, e1 = p0 - p2, e2 = p1 - p0;
    const Vec2 g[3] = {Vec2(-e0.y(), e0.x()) / (2.0 * area),
                       Vec2(-e1.y(), e1.x()) / (2.0 * area),
                       Vec2(-e2.y(), e2.x()) / (2.0 * area)};
    for (int m = 0; m < 3; ++m) {
      const int rm = 2 * ord.new_of_old[t[m]];
      for (int n = 0; n < 3; ++n) {
        const int cn = 2 * ord.new_of_old[t[n]];
        const double dot_mn = g[m].dot(g[n]);
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            const double val =
                area * (mu * ((i == j ? dot_mn : 0.0) + g[m][j] * g[n][i]) +
                        lambda * g[m][i] * g[n][j]);
            if (val != 0.0) trip.emplace_back(rm + i, cn + j, val);
          }
        }
      }
    }
  }

  Eigen::SparseMatrix<double> A(n_dofs, n_dofs);
  A.setFromTriplets(trip.begin(), trip.end());
  return make_stiffness(std::move(A), ord.boundary_nodes);
}

SchurOperator schur_condense(const StiffnessMatrix& A) {
  SchurOperator op;
  op.boundary_nodes = A.boundary_nodes;
  if (A.interior_dofs() == 0) {
    op.S = Eigen::MatrixXd(A.A_BB);
    op.interior_map.resize(0, A.boundary_dofs());
    return op;
  }
  const Eigen::MatrixXd X = A.interior->solve(Eigen::MatrixXd(A.A_IB));
  op.S = Eigen::MatrixXd(A.A_BB) - Eigen::MatrixXd(A.A_BI) * X;
  op.S = 0.5 * (op.S + op.S.transpose()).eval();
  op.interior_map = -X;
  return op;
}

Eigen::VectorXd recover_interior(const StiffnessMatrix& A, const Eigen::VectorXd& u_B) {
  if (u_B.size() != A.boundary_dofs())
    throw std::invalid_argument("recover_interior: boundary displacement size mismatch");
  if (A.interior_dofs() == 0) return Eigen::VectorXd(0);
  return -A.interior->solve(A.A_IB * u_B);
}

Eigen::VectorXd boundary_forces(const SchurOperator& S, const Eigen::VectorXd& u_B) {
  if (u_B.size() != S.S.rows())
    throw std::invalid_argument("boundary_forces: boundary displacement size mismatch");
  return S.S * u_B;
}

}  // namespace elastmatch
