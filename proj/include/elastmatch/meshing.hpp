#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "elastmatch/geometry.hpp"

namespace elastmatch {

// Conforming triangulation of a polygonal disk. Triangles are CCW;
// boundary_loop lists the boundary node ids as a cycle.
struct TriMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> boundary_loop;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  int boundary_count() const { return static_cast<int>(boundary_loop.size()); }
};

struct MesherOptions {
  // <= 0 picks polygon_area / 230, which lands in the low hundreds of
  // triangles for typical shapes.
  double max_triangle_area = 0.0;
  double min_angle_deg = 25.0;
  int max_insertions = 20000;
};

// Refinement could not reach the requested quality (for example a boundary
// corner sharper than the angle bound, which interior insertions cannot fix).
struct MeshFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Triangulates the region bounded by a simple CCW polygon without inserting
// boundary nodes: nodes 0..K-1 are exactly the input vertices in order and
// boundary_loop is (0, 1, ..., K-1). Interior Steiner nodes follow.
TriMesh triangulate(const Polygon& p, const MesherOptions& opts = {});

// Node permutation putting boundary nodes first (in boundary_loop order),
// interior nodes after. System dof 2*new_of_old[n] + c holds component c of
// node n.
struct NodeOrdering {
  std::vector<int> new_of_old;
  std::vector<int> old_of_new;
  int boundary_nodes = 0;
};

NodeOrdering order_nodes(const TriMesh& m);

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c);

// Smallest interior angle of the mesh, in degrees.
double mesh_min_angle_deg(const TriMesh& m);

}  // namespace elastmatch
