#include "elastmatch/symdiff.hpp"

#include <limits>
#include <stdexcept>

namespace elastmatch {

DeformedBoundary::DeformedBoundary(Polygon b, Eigen::VectorXd disp)
    : base(std::move(b)), u(std::move(disp)) {
  if (u.size() != 2 * base.size())
    throw std::invalid_argument("DeformedBoundary: displacement size must be 2K");
}

Polygon DeformedBoundary::ring() const {
  Polygon r = base;
  for (int i = 0; i < r.size(); ++i) r[i] += u.segment<2>(2 * i);
  return r;
}

double area_at(const DeformedBoundary& db, const PolygonSet& target) {
  return symdiff_area(PolygonSet::from_outer(db.ring()), target);
}

double overlap_area(const DeformedBoundary& db, const PolygonSet& target) {
  return set_area(clip(PolygonSet::from_outer(db.ring()), target, BoolOp::Intersection));
}

namespace {

double joint_bbox_diag(const Polygon& ring, const PolygonSet& target) {
  Vec2 lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
  Vec2 hi = -lo;
  for (const Vec2& v : ring.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  for (const auto& r : target.rings) {
    for (const Vec2& v : r.polygon.vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
  }
  return (hi - lo).norm();
}

}  // namespace

SymdiffGradient gradient(const DeformedBoundary& db, const PolygonSet& target,
                         double step) {
  const Polygon ring = db.ring();
  const int k = ring.size();
  const double h = step > 0.0 ? step : 1e-3 * joint_bbox_diag(ring, target);

  SymdiffGradient out;
  out.normals = outward_normals(ring);
  out.base_area = symdiff_area(PolygonSet::from_outer(ring), target);
  out.g.resize(2 * k);
  out.slopes.resize(k);
  for (int i = 0; i < k; ++i) {
    Polygon moved = ring;
    moved[i] += h * out.normals[i];
    const double area_i = symdiff_area(PolygonSet::from_outer(moved), target);
    const double slope = (area_i - out.base_area) / h;
    out.slopes[i] = slope;
    out.g.segment<2>(2 * i) = slope * out.normals[i];
  }
  return out;
}

SymdiffGradient central_gradient(const DeformedBoundary& db, const PolygonSet& target,
                                 double step) {
  const Polygon ring = db.ring();
  const int k = ring.size();
  const double h = step > 0.0 ? step : 1e-3 * joint_bbox_diag(ring, target);

  SymdiffGradient out;
  out.normals = outward_normals(ring);
  out.base_area = symdiff_area(PolygonSet::from_outer(ring), target);
  out.g.resize(2 * k);
  out.slopes.resize(k);
  for (int i = 0; i < k; ++i) {
    Polygon fwd = ring, bwd = ring;
    fwd[i] += h * out.normals[i];
    bwd[i] -= h * out.normals[i];
    const double area_f = symdiff_area(PolygonSet::from_outer(fwd), target);
    const double area_b = symdiff_area(PolygonSet::from_outer(bwd), target);
    const double slope = (area_f - area_b) / (2.0 * h);
    out.slopes[i] = slope;
    out.g.segment<2>(2 * i) = slope * out.normals[i];
  }
  return out;
}

Eigen::VectorXd restoring_force(const SymdiffGradient& grad) { return -grad.g; }

}  // namespace elastmatch
