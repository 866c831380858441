#pragma once

#include <string>
#include <vector>

#include "elastmatch/conic.hpp"
#include "elastmatch/elasticity.hpp"
#include "elastmatch/geometry.hpp"
#include "elastmatch/meshing.hpp"
#include "elastmatch/symdiff.hpp"

namespace elastmatch {

struct MatchConfig {
  double alpha = 0.0;             // area weight; 0 picks 2500/(area_s + area_t)^2, normalized units
  double beta = 1.0;              // proximal weight on ||u - u_prev||^2
  ElasticParams elastic;          // material parameters for the source mesh
  int max_iterations = 50;
  double stop_fraction = 0.01;    // stop once symdiff/(area_s + area_t) falls below this
  double fd_step = 0.0;           // gradient step; 0 picks 1e-3 * joint bbox diagonal
  double distortion_bound = 0.0;  // conformal distortion cap (> 1); 0 disables
  MesherOptions mesh;
  SolverOptions solver;
};

struct IterationRecord {
  int iter = 0;
  double area_abs = 0.0;       // symmetric difference, original units
  double area_fraction = 0.0;  // symmetric difference / (area_s + area_t)
  double force_norm = 0.0;     // total elastic force, sum of per-vertex norms, normalized units
  double max_cd = 0.0;         // conformal distortion over unflipped triangles
  double mean_cd = 0.0;
  int flipped = 0;             // triangles with nonpositive jacobian determinant
  std::string solver_status;
};

struct MatchResult {
  Polygon deformed;                  // source boundary after matching, original units
  Eigen::VectorXd displacement;      // 2K boundary displacement, original units, input vertex order
  Eigen::VectorXd boundary_forces;   // 2K elastic forces at the final displacement, normalized units
  Eigen::VectorXd interior_displacement;  // 2(N-K) zero-force extension, original units
  std::vector<int> interior_node_ids;     // mesh node id per interior_displacement slot
  std::vector<IterationRecord> iterations;
  std::string stop_reason;  // converged | iteration_limit | no_overlap |
                            // solver_failure | stalled | collapsed
  TriMesh mesh;                      // source mesh, original units
  double final_area = 0.0;
  double final_fraction = 0.0;

  const IterationRecord* last() const {
    return iterations.empty() ? nullptr : &iterations.back();
  }
};

// Deforms the source polygon onto the target by repeatedly minimizing
//   sum_i ||elastic force at vertex i|| + alpha * (linearized symdiff)^2
//   + beta * ||u - u_prev||^2
// over boundary displacements, with the elastic response condensed to the
// boundary. Optionally constrains per-triangle conformal distortion.
MatchResult match(const Polygon& source, const Polygon& target, const MatchConfig& cfg = {});

// Same, but the source polygon and its triangulation are taken from a
// prebuilt mesh (boundary loop wound counterclockwise) instead of being
// meshed internally.
MatchResult match(const TriMesh& source_mesh, const Polygon& target, const MatchConfig& cfg = {});

// Baseline with the same elastic term but a nearest-point fidelity: each
// boundary vertex is pulled toward its closest point on the target boundary.
MatchResult nearest_point_match(const Polygon& source, const Polygon& target,
                                const MatchConfig& cfg = {});

// sigma_max / sigma_min of a linear map, +infinity when the determinant is
// not positive
double conformal_distortion(const Eigen::Matrix2d& j);

// Per-triangle 4 x 2K maps from boundary displacements to the jacobian
// coordinates (a, b, c, d) = ((J11+J22)/2, (J21-J12)/2, (J11-J22)/2,
// (J12+J21)/2), constant part (1, 0, 0, 0), interior nodes following the
// zero-force extension of the boundary.
std::vector<Eigen::Matrix<double, 4, Eigen::Dynamic>> jacobian_coordinate_maps(
    const TriMesh& mesh, const NodeOrdering& ordering, const SchurOperator& schur);

}  // namespace elastmatch
