#include "elastmatch/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace elastmatch {

Polygon Polygon::reversed() const {
  Polygon r(*this);
  std::reverse(r.vertices.begin(), r.vertices.end());
  return r;
}

Polygon Polygon::translated(const Vec2& t) const {
  Polygon r(*this);
  for (auto& v : r.vertices) v += t;
  return r;
}

PolygonSet PolygonSet::from_outer(Polygon p) {
  PolygonSet s;
  if (p.size() >= 3) {
    if (signed_area(p) < 0.0) p = p.reversed();
    s.rings.push_back({std::move(p), RingRole::Outer});
  }
  return s;
}

double signed_area(const Polygon& p) {
  const int n = p.size();
  double twice = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % n];
    twice += a.x() * b.y() - a.y() * b.x();
  }
  return 0.5 * twice;
}

double set_area(const PolygonSet& s) {
  double a = 0.0;
  for (const auto& r : s.rings) a += signed_area(r.polygon);
  return a;
}

namespace {

int orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  double d = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  return (d > 0.0) - (d < 0.0);
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  int o1 = orient(a, b, c), o2 = orient(a, b, d);
  int o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

}  // namespace

bool is_simple(const Polygon& p) {
  const int n = p.size();
  if (n < 3) return false;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (p[i] == p[j]) return false;
  for (int i = 0; i < n; ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % n];
    if (a == b) return false;
    for (int j = i + 1; j < n; ++j) {
      bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_cross(a, b, p[j], p[(j + 1) % n])) return false;
    }
  }
  return true;
}

std::vector<Vec2> outward_normals(const Polygon& p) {
  const int n = p.size();
  std::vector<Vec2> normals(n);
  for (int i = 0; i < n; ++i) {
    const Vec2& prev = p[(i + n - 1) % n];
    const Vec2& cur = p[i];
    const Vec2& next = p[(i + 1) % n];
    Vec2 e0 = (cur - prev).normalized();
    Vec2 e1 = (next - cur).normalized();
    // Outward edge normals of a CCW ring point right of travel.
    Vec2 n0(e0.y(), -e0.x());
    Vec2 n1(e1.y(), -e1.x());
    Vec2 bis = n0 + n1;
    double len = bis.norm();
    if (len <= 1e-14) {
      throw DegenerateVertex("outward_normals: vertex " + std::to_string(i) +
                             " joins anti-parallel edges");
    }
    normals[i] = bis / len;
  }
  return normals;
}

double symdiff_area(const PolygonSet& a, const PolygonSet& b) {
  PolygonSet d = clip(a, b, BoolOp::SymmetricDifference);
  double area = set_area(d);
  return area < 0.0 ? 0.0 : area;
}

}  // namespace elastmatch
