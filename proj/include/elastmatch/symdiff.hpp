#pragma once

#include <Eigen/Dense>

#include "elastmatch/geometry.hpp"

namespace elastmatch {

// Source boundary displaced vertexwise: vertex i moves by (u[2i], u[2i+1]).
struct DeformedBoundary {
  Polygon base;
  Eigen::VectorXd u;

  DeformedBoundary(Polygon b, Eigen::VectorXd disp);

  Polygon ring() const;
};

// area(deformed xor target); one clip call
double area_at(const DeformedBoundary& db, const PolygonSet& target);

// area of (deformed intersect target); zero overlap means the symmetric
// difference carries no alignment information
double overlap_area(const DeformedBoundary& db, const PolygonSet& target);

struct SymdiffGradient {
  Eigen::VectorXd g;            // 2K, g_i = slope_i * normal_i
  Eigen::VectorXd slopes;       // K directional derivatives
  std::vector<Vec2> normals;    // unit outward bisector normals of the ring
  double base_area = 0.0;       // symdiff area at the evaluation point
};

// Forward differences of the symdiff area along the outward bisector normal
// of each deformed vertex. Exactly K+1 clip calls. step <= 0 picks
// 1e-3 times the joint bounding-box diagonal.
SymdiffGradient gradient(const DeformedBoundary& db, const PolygonSet& target,
                         double step = 0.0);

// Central-difference variant, 2K+1 clip calls. Where a boundary segment lies
// on the target boundary the area has a crease; the central slope vanishes
// there instead of crediting inward motion, which matters when the gradient
// drives an optimizer.
SymdiffGradient central_gradient(const DeformedBoundary& db, const PolygonSet& target,
                                 double step = 0.0);

// Sparse elastic restoring direction: minus the area gradient.
Eigen::VectorXd restoring_force(const SymdiffGradient& grad);

}  // namespace elastmatch
