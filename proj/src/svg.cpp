#include "elastmatch/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "elastmatch/io.hpp"

namespace elastmatch {

namespace {

struct Fit {
  double scale = 1.0;
  Vec2 lo{0.0, 0.0};
  double width = 800.0, height = 600.0;
  static constexpr double margin = 40.0;

  Vec2 to_px(const Vec2& p) const {
    return {margin + (p.x() - lo.x()) * scale,
            height - margin - (p.y() - lo.y()) * scale};
  }
};

Fit fit_world(const std::vector<Vec2>& pts) {
  Vec2 lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
  Vec2 hi = -lo;
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Fit f;
  Vec2 span = hi - lo;
  double w = std::max(span.x(), 1e-12), h = std::max(span.y(), 1e-12);
  f.scale = (800.0 - 2 * Fit::margin) / w;
  f.height = std::ceil(h * f.scale + 2 * Fit::margin);
  f.lo = lo;
  return f;
}

void fmt(std::string& out, const char* pattern, double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  out += buf;
}

std::string path_data(const Polygon& ring, const Fit& f) {
  std::string d;
  for (int i = 0; i < ring.size(); ++i) {
    Vec2 p = f.to_px(ring[i]);
    d += i == 0 ? "M" : " L";
    fmt(d, "%.2f %.2f", p.x(), p.y());
  }
  d += " Z";
  return d;
}

}  // namespace

void save_overlay_svg(const std::string& path, const std::vector<SvgOutline>& outlines,
                      const SvgArrows& arrows) {
  std::vector<Vec2> all;
  for (const auto& o : outlines)
    all.insert(all.end(), o.ring.vertices.begin(), o.ring.vertices.end());
  for (const auto& p : arrows.base) all.push_back(p);
  if (all.empty()) all = {{0.0, 0.0}, {1.0, 1.0}};
  Fit f = fit_world(all);

  double longest = 0.0;
  for (const auto& v : arrows.vec) longest = std::max(longest, v.norm());
  double diag = std::hypot(f.width, f.height) / f.scale;
  double mult = longest > 0.0 ? 0.08 * diag / longest : 1.0;

  std::string s;
  {
    char head[160];
    std::snprintf(head, sizeof head,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" "
                  "height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                  f.width, f.height, f.width, f.height);
    s += head;
  }
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& o : outlines) {
    s += "<path d=\"" + path_data(o.ring, f) + "\" fill=\"" + o.color +
         "\" fill-opacity=\"0.12\" stroke=\"" + o.color + "\" stroke-width=\"1.5\"/>\n";
  }
  for (size_t i = 0; i < arrows.base.size() && i < arrows.vec.size(); ++i) {
    Vec2 v = arrows.vec[i];
    if (v.norm() * mult * f.scale < 1.0) continue;
    Vec2 a = f.to_px(arrows.base[i]);
    Vec2 b = f.to_px(arrows.base[i] + mult * v);
    Vec2 d = b - a;
    double len = d.norm();
    Vec2 t = d / len, n(-t.y(), t.x());
    Vec2 h1 = b - 6.0 * t + 2.5 * n, h2 = b - 6.0 * t - 2.5 * n;
    std::string line = "<path d=\"M";
    fmt(line, "%.2f %.2f", a.x(), a.y());
    line += " L";
    fmt(line, "%.2f %.2f", b.x(), b.y());
    line += " M";
    fmt(line, "%.2f %.2f", h1.x(), h1.y());
    line += " L";
    fmt(line, "%.2f %.2f", b.x(), b.y());
    line += " L";
    fmt(line, "%.2f %.2f", h2.x(), h2.y());
    line += "\" fill=\"none\" stroke=\"" + arrows.color + "\" stroke-width=\"1.2\"/>\n";
    s += line;
  }
  if (!arrows.vec.empty() && longest > 0.0) {
    char legend[120];
    std::snprintf(legend, sizeof legend,
                  "<text x=\"%.0f\" y=\"%.0f\" font-family=\"monospace\" "
                  "font-size=\"12\" fill=\"#444\">arrows scaled by %.3g</text>\n",
                  Fit::margin * 0.3, f.height - 8.0, mult);
    s += legend;
  }
  s += "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << s;
}

void save_mesh_svg(const std::string& path, const TriMesh& mesh) {
  Fit f = fit_world(mesh.nodes);
  std::string s;
  {
    char head[160];
    std::snprintf(head, sizeof head,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" "
                  "height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                  f.width, f.height, f.width, f.height);
    s += head;
  }
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& t : mesh.triangles) {
    std::string d;
    for (int k = 0; k < 3; ++k) {
      Vec2 p = f.to_px(mesh.nodes[t[k]]);
      d += k == 0 ? "M" : " L";
      fmt(d, "%.2f %.2f", p.x(), p.y());
    }
    d += " Z";
    s += "<path d=\"" + d + "\" fill=\"none\" stroke=\"#99a\" stroke-width=\"0.6\"/>\n";
  }
  if (!mesh.boundary_loop.empty()) {
    std::string d;
    for (size_t i = 0; i < mesh.boundary_loop.size(); ++i) {
      Vec2 p = f.to_px(mesh.nodes[mesh.boundary_loop[i]]);
      d += i == 0 ? "M" : " L";
      fmt(d, "%.2f %.2f", p.x(), p.y());
    }
    d += " Z";
    s += "<path d=\"" + d + "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1.5\"/>\n";
  }
  s += "</svg>\n";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << s;
}

}  // namespace elastmatch
