#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace elastmatch {

using Vec2 = Eigen::Vector2d;

// Closed polygonal ring; the edge (back, front) is implicit.
struct Polygon {
  std::vector<Vec2> vertices;

  Polygon() = default;
  explicit Polygon(std::vector<Vec2> v) : vertices(std::move(v)) {}

  int size() const { return static_cast<int>(vertices.size()); }
  const Vec2& operator[](int i) const { return vertices[i]; }
  Vec2& operator[](int i) { return vertices[i]; }

  Polygon reversed() const;
  Polygon translated(const Vec2& t) const;
};

enum class RingRole { Outer, Hole };

// Region bounded by even-odd rings. Outer rings are CCW, holes CW; the
// clipper emits this orientation and the loaders canonicalize to it.
struct PolygonSet {
  struct Ring {
    Polygon polygon;
    RingRole role;
  };
  std::vector<Ring> rings;

  static PolygonSet from_outer(Polygon p);
  bool empty() const { return rings.empty(); }
};

enum class BoolOp { Intersection, Union, Difference, SymmetricDifference };

// Inputs whose snapped overlay does not stabilize (should not happen for
// coordinates within the documented range).
struct ClipDegeneracy : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two adjacent edges fold back onto each other exactly, so the vertex has
// no angle-bisector direction.
struct DegenerateVertex : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shoelace area: positive for CCW rings.
double signed_area(const Polygon& p);

// True if no two non-adjacent edges intersect and no vertex repeats.
// Consecutive collinear vertices are allowed.
bool is_simple(const Polygon& p);

// Area of the region (outer areas minus hole areas under even-odd fill).
double set_area(const PolygonSet& s);

// Boolean overlay of two regions under even-odd fill. Coordinates are
// snapped to a grid of step 2^-31 times the joint bounding-box diagonal and
// the overlay is computed exactly on that grid, so results are deterministic
// and identical shapes cancel exactly.
PolygonSet clip(const PolygonSet& a, const PolygonSet& b, BoolOp op);

// area(a xor b), nonnegative. Counts one clip call.
double symdiff_area(const PolygonSet& a, const PolygonSet& b);

// Unit angle-bisector normals, one per vertex, pointing out of a CCW ring.
// Throws DegenerateVertex if adjacent edges are exactly anti-parallel.
std::vector<Vec2> outward_normals(const Polygon& p);

// Process-wide count of clip() invocations, for instrumentation.
std::uint64_t clip_call_count();

}  // namespace elastmatch
