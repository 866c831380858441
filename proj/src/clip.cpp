// Boolean overlay on a snapped integer grid.
//
// Both inputs are snapped to a lattice whose step is 2^-31 of the joint
// bounding-box diagonal. Segments are subdivided at pairwise intersections
// (rounded to the lattice, iterated until no new crossings appear), exact
// duplicates are merged by XOR-ing per-input parity labels, and each
// surviving segment's two sides are classified with one exact ray cast in
// quarter-integer coordinates. Edges whose two sides disagree under the
// requested predicate are emitted with the kept region on their left and
// stitched into rings by a sharpest-turn rule. All predicates use 128-bit
// integer arithmetic, so the overlay is deterministic and two identical
// inputs cancel exactly.

#include "elastmatch/geometry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <utility>

namespace elastmatch {

namespace {

using i64 = std::int64_t;
using i128 = __int128;

std::atomic<std::uint64_t> g_clip_calls{0};

struct IPt {
  i64 x = 0, y = 0;
  friend bool operator==(const IPt& a, const IPt& b) { return a.x == b.x && a.y == b.y; }
  friend bool operator!=(const IPt& a, const IPt& b) { return !(a == b); }
  friend bool operator<(const IPt& a, const IPt& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  }
};

i128 cross2(i64 ax, i64 ay, i64 bx, i64 by) {
  return static_cast<i128>(ax) * by - static_cast<i128>(ay) * bx;
}

i128 dot2(i64 ax, i64 ay, i64 bx, i64 by) {
  return static_cast<i128>(ax) * bx + static_cast<i128>(ay) * by;
}

i128 floor_div(i128 num, i128 den) {
  i128 q = num / den;
  i128 r = num % den;
  if (r != 0 && ((r < 0) != (den < 0))) --q;
  return q;
}

// Nearest lattice value of num/den, halves toward +infinity.
i64 round_div(i128 num, i128 den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  return static_cast<i64>(floor_div(2 * num + den, 2 * den));
}

// Parity toggle mask: bit 0 = first input, bit 1 = second.
struct Seg {
  IPt a, b;
  unsigned mask = 0;
};

struct SnapFrame {
  Vec2 origin;
  double scale = 1.0;

  IPt snap(const Vec2& p) const {
    return {static_cast<i64>(std::llround((p.x() - origin.x()) * scale)),
            static_cast<i64>(std::llround((p.y() - origin.y()) * scale))};
  }
  Vec2 unsnap(const IPt& p) const {
    return origin + Vec2(static_cast<double>(p.x), static_cast<double>(p.y)) / scale;
  }
};

void gather_segments(const PolygonSet& s, unsigned mask, const SnapFrame& frame,
                     std::vector<Seg>& out) {
  for (const auto& ring : s.rings) {
    const int n = ring.polygon.size();
    if (n < 2) continue;
    std::vector<IPt> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = frame.snap(ring.polygon[i]);
    for (int i = 0; i < n; ++i) {
      const IPt& a = pts[i];
      const IPt& b = pts[(i + 1) % n];
      if (a != b) out.push_back({a, b, mask});
    }
  }
}

// Intersection points of two closed segments, rounded to the lattice and
// appended to each segment's split list (endpoints excluded).
void collect_splits(const Seg& s, const Seg& t, std::vector<IPt>& splits_s,
                    std::vector<IPt>& splits_t) {
  const i64 rx = s.b.x - s.a.x, ry = s.b.y - s.a.y;
  const i64 sx = t.b.x - t.a.x, sy = t.b.y - t.a.y;
  const i64 acx = t.a.x - s.a.x, acy = t.a.y - s.a.y;
  i128 den = cross2(rx, ry, sx, sy);
  if (den == 0) {
    if (cross2(acx, acy, rx, ry) != 0) return;  // parallel, distinct lines
    const i128 len_s = dot2(rx, ry, rx, ry);
    for (const IPt& p : {t.a, t.b}) {
      i128 u = dot2(p.x - s.a.x, p.y - s.a.y, rx, ry);
      if (u > 0 && u < len_s) splits_s.push_back(p);
    }
    const i128 len_t = dot2(sx, sy, sx, sy);
    for (const IPt& p : {s.a, s.b}) {
      i128 u = dot2(p.x - t.a.x, p.y - t.a.y, sx, sy);
      if (u > 0 && u < len_t) splits_t.push_back(p);
    }
    return;
  }
  i128 t_num = cross2(acx, acy, sx, sy);
  i128 u_num = cross2(acx, acy, rx, ry);
  if (den < 0) {
    den = -den;
    t_num = -t_num;
    u_num = -u_num;
  }
  if (t_num < 0 || t_num > den || u_num < 0 || u_num > den) return;
  IPt p{s.a.x + round_div(t_num * rx, den), s.a.y + round_div(t_num * ry, den)};
  if (p != s.a && p != s.b) splits_s.push_back(p);
  if (p != t.a && p != t.b) splits_t.push_back(p);
}

bool bbox_overlap(const Seg& s, const Seg& t) {
  return std::max(s.a.x, s.b.x) >= std::min(t.a.x, t.b.x) &&
         std::max(t.a.x, t.b.x) >= std::min(s.a.x, s.b.x) &&
         std::max(s.a.y, s.b.y) >= std::min(t.a.y, t.b.y) &&
         std::max(t.a.y, t.b.y) >= std::min(s.a.y, s.b.y);
}

// Subdivide until the segment set is closed under pairwise intersection on
// the lattice. Rounding a crossing can create a fresh crossing with a third
// segment, hence the outer loop; it settles in a couple of passes.
std::vector<Seg> subdivide_to_closure(std::vector<Seg> segs) {
  for (int pass = 0; pass < 16; ++pass) {
    const int n = static_cast<int>(segs.size());
    std::vector<std::vector<IPt>> splits(n);
    bool any = false;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (!bbox_overlap(segs[i], segs[j])) continue;
        collect_splits(segs[i], segs[j], splits[i], splits[j]);
      }
    }
    std::vector<Seg> next;
    next.reserve(segs.size());
    for (int i = 0; i < n; ++i) {
      if (splits[i].empty()) {
        next.push_back(segs[i]);
        continue;
      }
      any = true;
      const Seg& s = segs[i];
      const i64 rx = s.b.x - s.a.x, ry = s.b.y - s.a.y;
      std::vector<IPt>& pts = splits[i];
      pts.push_back(s.a);
      pts.push_back(s.b);
      std::sort(pts.begin(), pts.end(), [&](const IPt& p, const IPt& q) {
        return dot2(p.x - s.a.x, p.y - s.a.y, rx, ry) <
               dot2(q.x - s.a.x, q.y - s.a.y, rx, ry);
      });
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        if (pts[k] != pts[k + 1]) next.push_back({pts[k], pts[k + 1], s.mask});
      }
    }
    if (!any) return next;
    segs = std::move(next);
  }
  throw ClipDegeneracy("clip: snapped overlay did not stabilize");
}

// Canonical direction: lexicographically increasing endpoints, so vertical
// segments point up and everything else points right.
std::vector<Seg> merge_duplicates(const std::vector<Seg>& segs) {
  std::map<std::pair<IPt, IPt>, unsigned> acc;
  for (const Seg& s : segs) {
    auto key = s.a < s.b ? std::make_pair(s.a, s.b) : std::make_pair(s.b, s.a);
    acc[key] ^= s.mask;
  }
  std::vector<Seg> out;
  out.reserve(acc.size());
  for (const auto& [key, mask] : acc) {
    if (mask != 0) out.push_back({key.first, key.second, mask});
  }
  return out;
}

// Parity of the region touching segment i from the left of its canonical
// direction. One exact ray cast: the query line passes through the segment
// interior at a quarter-integer offset, so it meets no lattice point and
// crosses every other segment transversally or not at all.
unsigned left_parity(const std::vector<Seg>& segs, int i) {
  const Seg& s = segs[i];
  unsigned parity = 0;
  const bool vertical = s.a.x == s.b.x;
  const int n = static_cast<int>(segs.size());
  if (vertical) {
    // Horizontal ray from x = -inf at y* = a.y + 1/4; left side is smaller x.
    const i128 ys4 = 4 * static_cast<i128>(s.a.y) + 1;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      IPt p = segs[j].a, q = segs[j].b;
      if (p.y > q.y) std::swap(p, q);
      if (4 * static_cast<i128>(p.y) >= ys4 || 4 * static_cast<i128>(q.y) <= ys4) continue;
      const i128 den = 4 * (static_cast<i128>(q.y) - p.y);
      const i128 num = static_cast<i128>(p.x) * den +
                       (static_cast<i128>(q.x) - p.x) * (ys4 - 4 * static_cast<i128>(p.y));
      if (num < static_cast<i128>(s.a.x) * den) parity ^= segs[j].mask;
    }
  } else {
    // Vertical ray from y = +inf at x* = a.x + 1/4; left side is above.
    const i128 xs4 = 4 * static_cast<i128>(s.a.x) + 1;
    const i128 den_s = 4 * (static_cast<i128>(s.b.x) - s.a.x);
    const i128 num_s = static_cast<i128>(s.a.y) * den_s +
                       (static_cast<i128>(s.b.y) - s.a.y) * (xs4 - 4 * static_cast<i128>(s.a.x));
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      IPt p = segs[j].a, q = segs[j].b;
      if (p.x > q.x) std::swap(p, q);
      if (4 * static_cast<i128>(p.x) >= xs4 || 4 * static_cast<i128>(q.x) <= xs4) continue;
      const i128 den = 4 * (static_cast<i128>(q.x) - p.x);
      const i128 num = static_cast<i128>(p.y) * den +
                       (static_cast<i128>(q.y) - p.y) * (xs4 - 4 * static_cast<i128>(p.x));
      // num/den > num_s/den_s, both denominators positive
      if (num * den_s > num_s * den) parity ^= segs[j].mask;
    }
  }
  return parity;
}

bool keep(BoolOp op, unsigned parity) {
  const bool a = parity & 1u, b = parity & 2u;
  switch (op) {
    case BoolOp::Intersection: return a && b;
    case BoolOp::Union: return a || b;
    case BoolOp::Difference: return a && !b;
    case BoolOp::SymmetricDifference: return a != b;
  }
  return false;
}

struct DirEdge {
  int from = -1, to = -1;
};

// CCW order on nonzero integer directions, starting at east.
bool angle_less(const IPt& a, const IPt& b) {
  const int ha = (a.y > 0 || (a.y == 0 && a.x > 0)) ? 0 : 1;
  const int hb = (b.y > 0 || (b.y == 0 && b.x > 0)) ? 0 : 1;
  if (ha != hb) return ha < hb;
  return cross2(a.x, a.y, b.x, b.y) > 0;
}

// Region-left ring extraction: continue along the outgoing edge that is the
// first one clockwise from the reversed arrival direction. The kept wedge at
// each vertex lies between those two directions, so every directed edge has
// exactly one successor and the walk partitions the edges into cycles.
std::vector<std::vector<IPt>> assemble_rings(const std::vector<IPt>& pos,
                                             const std::vector<DirEdge>& edges) {
  const int nv = static_cast<int>(pos.size());
  std::vector<std::vector<int>> outgoing(nv);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e)
    outgoing[edges[e].from].push_back(e);
  auto dir = [&](int e) {
    return IPt{pos[edges[e].to].x - pos[edges[e].from].x,
               pos[edges[e].to].y - pos[edges[e].from].y};
  };
  for (auto& list : outgoing) {
    std::sort(list.begin(), list.end(),
              [&](int e, int f) { return angle_less(dir(e), dir(f)); });
  }
  auto successor = [&](int e) {
    const IPt rev{pos[edges[e].from].x - pos[edges[e].to].x,
                  pos[edges[e].from].y - pos[edges[e].to].y};
    const auto& list = outgoing[edges[e].to];
    int lo = 0;
    const int n = static_cast<int>(list.size());
    // first outgoing direction greater than rev, predecessor wraps around
    while (lo < n && angle_less(dir(list[lo]), rev)) ++lo;
    return list[(lo - 1 + n) % n];
  };
  std::vector<bool> used(edges.size(), false);
  std::vector<std::vector<IPt>> rings;
  for (int start = 0; start < static_cast<int>(edges.size()); ++start) {
    if (used[start]) continue;
    std::vector<IPt> ring;
    int e = start;
    do {
      used[e] = true;
      ring.push_back(pos[edges[e].from]);
      e = successor(e);
    } while (e != start);
    rings.push_back(std::move(ring));
  }
  return rings;
}

// Drop vertices that continue straight through; subdivision leaves them on
// shared sub-edges and T-junctions.
void simplify_collinear(std::vector<IPt>& ring) {
  bool changed = true;
  while (changed && ring.size() >= 3) {
    changed = false;
    std::vector<IPt> next;
    next.reserve(ring.size());
    const int n = static_cast<int>(ring.size());
    for (int i = 0; i < n; ++i) {
      const IPt& p = ring[(i + n - 1) % n];
      const IPt& v = ring[i];
      const IPt& q = ring[(i + 1) % n];
      const i128 cr = cross2(v.x - p.x, v.y - p.y, q.x - v.x, q.y - v.y);
      const i128 dt = dot2(v.x - p.x, v.y - p.y, q.x - v.x, q.y - v.y);
      if (cr == 0 && dt > 0) {
        changed = true;
        continue;
      }
      next.push_back(v);
    }
    ring = std::move(next);
  }
}

i128 twice_lattice_area(const std::vector<IPt>& ring) {
  i128 a = 0;
  const int n = static_cast<int>(ring.size());
  for (int i = 0; i < n; ++i) {
    const IPt& p = ring[i];
    const IPt& q = ring[(i + 1) % n];
    a += cross2(p.x, p.y, q.x, q.y);
  }
  return a;
}

}  // namespace

std::uint64_t clip_call_count() { return g_clip_calls.load(); }

PolygonSet clip(const PolygonSet& a, const PolygonSet& b, BoolOp op) {
  g_clip_calls.fetch_add(1);

  Vec2 lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
  Vec2 hi = -lo;
  for (const PolygonSet* s : {&a, &b}) {
    for (const auto& ring : s->rings) {
      for (const auto& v : ring.polygon.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
    }
  }
  const double diag = (hi - lo).norm();
  if (!(diag > 0.0)) return {};

  SnapFrame frame{lo, std::ldexp(1.0, 31) / diag};

  std::vector<Seg> segs;
  gather_segments(a, 1u, frame, segs);
  gather_segments(b, 2u, frame, segs);
  if (segs.empty()) return {};

  segs = subdivide_to_closure(std::move(segs));
  segs = merge_duplicates(segs);

  std::map<IPt, int> vertex_id;
  std::vector<IPt> pos;
  auto vid = [&](const IPt& p) {
    auto [it, fresh] = vertex_id.try_emplace(p, static_cast<int>(pos.size()));
    if (fresh) pos.push_back(p);
    return it->second;
  };

  std::vector<DirEdge> edges;
  for (int i = 0; i < static_cast<int>(segs.size()); ++i) {
    const unsigned pl = left_parity(segs, i);
    const unsigned pr = pl ^ segs[i].mask;
    const bool in_left = keep(op, pl);
    const bool in_right = keep(op, pr);
    if (in_left == in_right) continue;
    const int u = vid(segs[i].a), v = vid(segs[i].b);
    if (in_left)
      edges.push_back({u, v});
    else
      edges.push_back({v, u});
  }
  if (edges.empty()) return {};

  PolygonSet result;
  for (auto& ring : assemble_rings(pos, edges)) {
    simplify_collinear(ring);
    if (ring.size() < 3) continue;
    const i128 area2 = twice_lattice_area(ring);
    if (area2 == 0) continue;
    Polygon poly;
    poly.vertices.reserve(ring.size());
    for (const IPt& p : ring) poly.vertices.push_back(frame.unsnap(p));
    result.rings.push_back({std::move(poly), area2 > 0 ? RingRole::Outer : RingRole::Hole});
  }
  return result;
}

}  // namespace elastmatch
