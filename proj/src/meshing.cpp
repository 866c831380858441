#include "elastmatch/meshing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace elastmatch {

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

namespace {

double min_angle_deg(const Vec2& a, const Vec2& b, const Vec2& c) {
  double worst = std::numeric_limits<double>::max();
  const Vec2 v[3] = {a, b, c};
  for (int i = 0; i < 3; ++i) {
    Vec2 e0 = v[(i + 1) % 3] - v[i];
    Vec2 e1 = v[(i + 2) % 3] - v[i];
    double ang = std::atan2(std::abs(e0.x() * e1.y() - e0.y() * e1.x()), e0.dot(e1));
    worst = std::min(worst, ang);
  }
  return worst * 180.0 / M_PI;
}

// d strictly inside the circumcircle of CCW triangle (a, b, c)
bool in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double ax = a.x() - d.x(), ay = a.y() - d.y();
  const double bx = b.x() - d.x(), by = b.y() - d.y();
  const double cx = c.x() - d.x(), cy = c.y() - d.y();
  const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                     (bx * bx + by * by) * (ax * cy - cx * ay) +
                     (cx * cx + cy * cy) * (ax * by - bx * ay);
  return det > 0.0;
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a, ac = c - a;
  const double d = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
  const double ab2 = ab.squaredNorm(), ac2 = ac.squaredNorm();
  return a + Vec2(ac.y() * ab2 - ab.y() * ac2, ab.x() * ac2 - ac.x() * ab2) / d;
}

struct EditMesh {
  std::vector<Vec2> pts;
  std::vector<std::array<int, 3>> tri;
  int nb = 0;  // pts[0..nb-1] are the boundary cycle

  bool boundary_edge(int a, int b) const {
    if (a >= nb || b >= nb) return false;
    return (a + 1) % nb == b || (b + 1) % nb == a;
  }

  double area(int t) const {
    return triangle_area(pts[tri[t][0]], pts[tri[t][1]], pts[tri[t][2]]);
  }

  // edge (a, b) -> triangle having the directed edge a->b
  std::map<std::pair<int, int>, int> directed_edges() const {
    std::map<std::pair<int, int>, int> m;
    for (int t = 0; t < static_cast<int>(tri.size()); ++t)
      for (int i = 0; i < 3; ++i) m[{tri[t][i], tri[t][(i + 1) % 3]}] = t;
    return m;
  }

  // One pass of Lawson flips over all interior edges; true if any flipped.
  bool delaunay_pass() {
    auto edges = directed_edges();
    std::vector<bool> dirty(tri.size(), false);
    bool flipped = false;
    for (const auto& [edge, t1] : edges) {
      auto [a, b] = edge;
      if (a > b || boundary_edge(a, b)) continue;
      auto it = edges.find({b, a});
      if (it == edges.end()) continue;
      int t2 = it->second;
      if (dirty[t1] || dirty[t2]) continue;
      int c = opposite(t1, a, b);
      int d = opposite(t2, b, a);
      if (!in_circumcircle(pts[a], pts[b], pts[c], pts[d])) continue;
      // flip (a,b) -> (c,d), keeping both triangles CCW
      if (triangle_area(pts[a], pts[d], pts[c]) <= 0.0 ||
          triangle_area(pts[b], pts[c], pts[d]) <= 0.0)
        continue;
      tri[t1] = {a, d, c};
      tri[t2] = {b, c, d};
      dirty[t1] = dirty[t2] = true;
      flipped = true;
    }
    return flipped;
  }

  void make_delaunay() {
    for (int pass = 0; pass < 200; ++pass)
      if (!delaunay_pass()) return;
  }

  int opposite(int t, int a, int b) const {
    for (int v : tri[t])
      if (v != a && v != b) return v;
    return -1;
  }

  // Walk from triangle start toward p; returns containing triangle or -1 if
  // the walk leaves the domain.
  int locate(const Vec2& p, int start, const std::map<std::pair<int, int>, int>& edges) const {
    int t = start;
    for (int step = 0; step < 4 * static_cast<int>(tri.size()) + 16; ++step) {
      int next = -1;
      for (int i = 0; i < 3; ++i) {
        int a = tri[t][i], b = tri[t][(i + 1) % 3];
        if (triangle_area(pts[a], pts[b], p) < 0.0) {
          auto it = edges.find({b, a});
          if (it == edges.end()) return -1;
          next = it->second;
          break;
        }
      }
      if (next < 0) return t;
      t = next;
    }
    return -1;
  }

  // Split triangle t at interior point p (1 -> 3). Returns false if p sits
  // essentially on an edge or vertex of t.
  bool split(int t, const Vec2& p) {
    const auto [i, j, k] = tri[t];
    const double scale = (pts[i] - pts[j]).norm() + (pts[j] - pts[k]).norm() +
                         (pts[k] - pts[i]).norm();
    const double tiny = 1e-10 * scale * scale;
    if (std::abs(triangle_area(pts[i], pts[j], p)) < tiny ||
        std::abs(triangle_area(pts[j], pts[k], p)) < tiny ||
        std::abs(triangle_area(pts[k], pts[i], p)) < tiny)
      return false;
    const int v = static_cast<int>(pts.size());
    pts.push_back(p);
    tri[t] = {i, j, v};
    tri.push_back({j, k, v});
    tri.push_back({k, i, v});
    return true;
  }

  double local_min_angle(const std::vector<int>& tris) const;

  // Laplacian smoothing of interior nodes. With angle_guard a move is kept
  // only if it does not lower the minimum angle of the incident triangles,
  // so quality never regresses.
  void smooth_interior(int passes, bool angle_guard = false) {
    std::vector<std::vector<int>> ring(pts.size());
    for (const auto& t : tri)
      for (int i = 0; i < 3; ++i) {
        ring[t[i]].push_back(t[(i + 1) % 3]);
        ring[t[i]].push_back(t[(i + 2) % 3]);
      }
    std::vector<std::vector<int>> incident(pts.size());
    for (int t = 0; t < static_cast<int>(tri.size()); ++t)
      for (int v : tri[t]) incident[v].push_back(t);
    for (int pass = 0; pass < passes; ++pass) {
      for (int v = nb; v < static_cast<int>(pts.size()); ++v) {
        Vec2 avg = Vec2::Zero();
        for (int w : ring[v]) avg += pts[w];
        avg /= static_cast<double>(ring[v].size());
        const Vec2 old = pts[v];
        const double before = angle_guard ? local_min_angle(incident[v]) : 0.0;
        pts[v] = avg;
        bool ok = true;
        for (int t : incident[v]) {
          if (area(t) <= 0.0) {
            ok = false;
            break;
          }
        }
        if (ok && angle_guard && local_min_angle(incident[v]) < before) ok = false;
        if (!ok) pts[v] = old;
      }
    }
  }
};

double EditMesh::local_min_angle(const std::vector<int>& tris) const {
  double worst = std::numeric_limits<double>::max();
  for (int t : tris)
    worst = std::min(worst, min_angle_deg(pts[tri[t][0]], pts[tri[t][1]], pts[tri[t][2]]));
  return worst;
}

std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2>& pts) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::array<int, 3>> tris;
  tris.reserve(n - 2);

  auto convex = [&](int a, int b, int c) {
    return triangle_area(pts[a], pts[b], pts[c]) > 0.0;
  };
  auto blocked = [&](int a, int b, int c) {
    for (int v : idx) {
      if (v == a || v == b || v == c) continue;
      if (triangle_area(pts[a], pts[b], pts[v]) >= 0.0 &&
          triangle_area(pts[b], pts[c], pts[v]) >= 0.0 &&
          triangle_area(pts[c], pts[a], pts[v]) >= 0.0)
        return true;
    }
    return false;
  };

  while (idx.size() > 3) {
    const int m = static_cast<int>(idx.size());
    int found = -1;
    for (int i = 0; i < m; ++i) {
      int a = idx[(i + m - 1) % m], b = idx[i], c = idx[(i + 1) % m];
      if (convex(a, b, c) && !blocked(a, b, c)) {
        found = i;
        break;
      }
    }
    if (found < 0) throw MeshFailure("triangulate: no ear found (degenerate boundary?)");
    const int m2 = static_cast<int>(idx.size());
    tris.push_back({idx[(found + m2 - 1) % m2], idx[found], idx[(found + 1) % m2]});
    idx.erase(idx.begin() + found);
  }
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

std::string describe_triangle(const EditMesh& m, int t) {
  std::ostringstream os;
  os << "triangle (" << m.pts[m.tri[t][0]].transpose() << ") ("
     << m.pts[m.tri[t][1]].transpose() << ") (" << m.pts[m.tri[t][2]].transpose() << ")";
  return os.str();
}

}  // namespace

TriMesh triangulate(const Polygon& p, const MesherOptions& opts) {
  if (p.size() < 3) throw MeshFailure("triangulate: polygon has fewer than 3 vertices");
  const double poly_area = signed_area(p);
  if (poly_area <= 0.0)
    throw MeshFailure("triangulate: polygon must be CCW with positive area");

  EditMesh m;
  m.pts = p.vertices;
  m.nb = p.size();
  m.tri = ear_clip(m.pts);
  m.make_delaunay();

  const double max_area =
      opts.max_triangle_area > 0.0 ? opts.max_triangle_area : poly_area / 230.0;

  int insertions = 0;
  // Insert the circumcenter of t if it lies inside the domain; optionally
  // fall back to the centroid. Returns whether a node was added.
  auto refine_once = [&](int t, bool centroid_fallback) {
    const Vec2 cc =
        circumcenter(m.pts[m.tri[t][0]], m.pts[m.tri[t][1]], m.pts[m.tri[t][2]]);
    const auto edges = m.directed_edges();
    const int home = m.locate(cc, t, edges);
    if (home >= 0 && m.split(home, cc)) {
      ++insertions;
      return true;
    }
    if (!centroid_fallback) return false;
    const Vec2 centroid =
        (m.pts[m.tri[t][0]] + m.pts[m.tri[t][1]] + m.pts[m.tri[t][2]]) / 3.0;
    if (!m.split(t, centroid)) return false;
    ++insertions;
    return true;
  };

  // size pass: split everything over the area bound
  bool sized = false;
  while (!sized) {
    if (insertions > opts.max_insertions)
      throw MeshFailure("triangulate: insertion budget exhausted during sizing");
    sized = true;
    for (int t = 0; t < static_cast<int>(m.tri.size()); ++t) {
      if (m.area(t) > max_area) {
        refine_once(t, true);
        sized = false;
      }
    }
    m.make_delaunay();
  }
  m.smooth_interior(3);
  m.make_delaunay();

  // quality pass: chase small angles with circumcenter insertions. Centroid
  // fallbacks only help away from the boundary; a skinny triangle pinned to a
  // long boundary edge cannot be fixed by splitting it, so when insertion is
  // blocked we rely on smoothing and give up only after a stagnant stretch.
  double best_seen = 0.0;
  int stagnant = 0;
  for (int round = 0; round < 600; ++round) {
    int worst = -1;
    double worst_angle = opts.min_angle_deg;
    for (int t = 0; t < static_cast<int>(m.tri.size()); ++t) {
      const double a = min_angle_deg(m.pts[m.tri[t][0]], m.pts[m.tri[t][1]], m.pts[m.tri[t][2]]);
      if (a < worst_angle) {
        worst_angle = a;
        worst = t;
      }
    }
    if (worst < 0) break;
    if (insertions > opts.max_insertions)
      throw MeshFailure("triangulate: insertion budget exhausted during quality pass");
    const bool interior = !m.boundary_edge(m.tri[worst][0], m.tri[worst][1]) &&
                          !m.boundary_edge(m.tri[worst][1], m.tri[worst][2]) &&
                          !m.boundary_edge(m.tri[worst][2], m.tri[worst][0]);
    const bool inserted = refine_once(worst, interior);
    m.make_delaunay();
    m.smooth_interior(inserted ? 2 : 4, true);
    m.make_delaunay();
    if (worst_angle > best_seen + 1e-9) {
      best_seen = worst_angle;
      stagnant = 0;
    } else if (!inserted && ++stagnant > 25) {
      break;
    }
  }

  double final_min = std::numeric_limits<double>::max();
  int bad = -1;
  for (int t = 0; t < static_cast<int>(m.tri.size()); ++t) {
    const double a = min_angle_deg(m.pts[m.tri[t][0]], m.pts[m.tri[t][1]], m.pts[m.tri[t][2]]);
    if (a < final_min) {
      final_min = a;
      bad = t;
    }
  }
  if (final_min < opts.min_angle_deg) {
    std::ostringstream os;
    os << "triangulate: min angle " << final_min << " deg below bound "
       << opts.min_angle_deg << " at " << describe_triangle(m, bad);
    throw MeshFailure(os.str());
  }

  TriMesh out;
  out.nodes = std::move(m.pts);
  out.triangles = std::move(m.tri);
  out.boundary_loop.resize(p.size());
  std::iota(out.boundary_loop.begin(), out.boundary_loop.end(), 0);
  return out;
}

NodeOrdering order_nodes(const TriMesh& m) {
  const int n = m.node_count();
  NodeOrdering ord;
  ord.boundary_nodes = m.boundary_count();
  ord.new_of_old.assign(n, -1);
  ord.old_of_new.assign(n, -1);
  int next = 0;
  for (int b : m.boundary_loop) {
    ord.new_of_old[b] = next;
    ord.old_of_new[next] = b;
    ++next;
  }
  for (int i = 0; i < n; ++i) {
    if (ord.new_of_old[i] < 0) {
      ord.new_of_old[i] = next;
      ord.old_of_new[next] = i;
      ++next;
    }
  }
  return ord;
}

double mesh_min_angle_deg(const TriMesh& m) {
  double worst = std::numeric_limits<double>::max();
  for (const auto& t : m.triangles)
    worst = std::min(worst, min_angle_deg(m.nodes[t[0]], m.nodes[t[1]], m.nodes[t[2]]));
  return worst;
}

}  // namespace elastmatch
