#include "elastmatch/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace elastmatch {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Polygon parse_ring_points(const json& pts, const std::string& path) {
  Polygon p;
  if (!pts.is_array() || pts.size() < 3)
    throw IoError(path + ": ring needs at least 3 points");
  for (const auto& q : pts) {
    if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number())
      throw IoError(path + ": point must be [x, y]");
    double x = q[0].get<double>(), y = q[1].get<double>();
    if (!std::isfinite(x) || !std::isfinite(y))
      throw IoError(path + ": coordinates must be finite");
    p.vertices.emplace_back(x, y);
  }
  return p;
}

void orient(Polygon& p, RingRole role) {
  double a = signed_area(p);
  bool want_ccw = role == RingRole::Outer;
  if ((a > 0.0) != want_ccw) p = p.reversed();
}

PolygonSet parse_shape_json(const std::string& text, const std::string& path) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw IoError(path + ": invalid JSON");
  if (!doc.is_object() || !doc.contains("rings") || !doc["rings"].is_array() ||
      doc["rings"].empty())
    throw IoError(path + ": expected {\"rings\": [...]} with at least one ring");
  PolygonSet shape;
  for (const auto& r : doc["rings"]) {
    if (!r.is_object() || !r.contains("role") || !r.contains("points"))
      throw IoError(path + ": ring needs \"role\" and \"points\"");
    std::string role = r["role"].get<std::string>();
    PolygonSet::Ring ring;
    if (role == "outer")
      ring.role = RingRole::Outer;
    else if (role == "hole")
      ring.role = RingRole::Hole;
    else
      throw IoError(path + ": role must be \"outer\" or \"hole\"");
    ring.polygon = parse_ring_points(r["points"], path);
    if (!is_simple(ring.polygon)) throw IoError(path + ": ring is not simple");
    orient(ring.polygon, ring.role);
    shape.rings.push_back(std::move(ring));
  }
  return shape;
}

PolygonSet parse_shape_csv(const std::string& text, const std::string& path) {
  Polygon p;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && line == "x,y") {
      first = false;
      continue;
    }
    first = false;
    double x, y;
    char comma;
    std::istringstream ls(line);
    if (!(ls >> x >> comma >> y) || comma != ',')
      throw IoError(path + ": expected \"x,y\" per line, got \"" + line + "\"");
    if (!std::isfinite(x) || !std::isfinite(y))
      throw IoError(path + ": coordinates must be finite");
    p.vertices.emplace_back(x, y);
  }
  if (p.size() < 3) throw IoError(path + ": ring needs at least 3 points");
  if (!is_simple(p)) throw IoError(path + ": ring is not simple");
  orient(p, RingRole::Outer);
  return PolygonSet::from_outer(std::move(p));
}

bool has_extension(const std::string& path, const char* ext) {
  auto dot = path.rfind('.');
  return dot != std::string::npos && path.substr(dot) == ext;
}

}  // namespace

PolygonSet load_shape(const std::string& path) {
  std::string text = read_file(path);
  if (has_extension(path, ".json")) return parse_shape_json(text, path);
  return parse_shape_csv(text, path);
}

void save_shape(const std::string& path, const PolygonSet& shape) {
  json rings = json::array();
  for (const auto& r : shape.rings) {
    json pts = json::array();
    for (const auto& v : r.polygon.vertices) pts.push_back({v.x(), v.y()});
    rings.push_back({{"role", r.role == RingRole::Outer ? "outer" : "hole"},
                     {"points", std::move(pts)}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << json{{"rings", std::move(rings)}}.dump(2) << "\n";
}

TriMesh load_mesh_off(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string header;
  in >> header;
  if (header != "OFF") throw IoError(path + ": missing OFF header");
  long n = 0, f = 0, e = 0;
  if (!(in >> n >> f >> e) || n < 3 || f < 1)
    throw IoError(path + ": bad counts line");
  TriMesh mesh;
  mesh.nodes.reserve(n);
  for (long i = 0; i < n; ++i) {
    double x, y, z;
    if (!(in >> x >> y >> z)) throw IoError(path + ": truncated node list");
    if (!std::isfinite(x) || !std::isfinite(y))
      throw IoError(path + ": coordinates must be finite");
    mesh.nodes.emplace_back(x, y);
  }
  for (long t = 0; t < f; ++t) {
    long c, i, j, k;
    if (!(in >> c >> i >> j >> k) || c != 3)
      throw IoError(path + ": faces must be triangles");
    if (i < 0 || i >= n || j < 0 || j >= n || k < 0 || k >= n || i == j || j == k || i == k)
      throw IoError(path + ": face index out of range");
    std::array<int, 3> tri = {int(i), int(j), int(k)};
    Vec2 a = mesh.nodes[tri[1]] - mesh.nodes[tri[0]];
    Vec2 b = mesh.nodes[tri[2]] - mesh.nodes[tri[0]];
    if (a.x() * b.y() - a.y() * b.x() < 0.0) std::swap(tri[1], tri[2]);
    mesh.triangles.push_back(tri);
  }

  // boundary edges appear in exactly one CCW triangle; directed that way they
  // wind CCW around the region, so following next[] walks the loop
  std::map<std::pair<int, int>, int> uses;
  for (const auto& t : mesh.triangles)
    for (int s = 0; s < 3; ++s) {
      int a = t[s], b = t[(s + 1) % 3];
      uses[{std::min(a, b), std::max(a, b)}]++;
    }
  std::map<int, int> next;
  int start = -1;
  for (const auto& t : mesh.triangles)
    for (int s = 0; s < 3; ++s) {
      int a = t[s], b = t[(s + 1) % 3];
      int count = uses[{std::min(a, b), std::max(a, b)}];
      if (count > 2) throw IoError(path + ": edge shared by more than two faces");
      if (count == 1) {
        if (next.count(a)) throw IoError(path + ": boundary is not a single cycle");
        next[a] = b;
        if (start < 0 || a < start) start = a;
      }
    }
  if (start < 0) throw IoError(path + ": mesh has no boundary");
  int at = start;
  do {
    auto it = next.find(at);
    if (it == next.end()) throw IoError(path + ": boundary is not a single cycle");
    mesh.boundary_loop.push_back(at);
    at = it->second;
  } while (at != start && mesh.boundary_loop.size() <= next.size());
  if (mesh.boundary_loop.size() != next.size())
    throw IoError(path + ": boundary is not a single cycle");
  return mesh;
}

void save_mesh_off(const std::string& path, const TriMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "OFF\n" << mesh.node_count() << " " << mesh.triangle_count() << " 0\n";
  char buf[80];
  for (const auto& v : mesh.nodes) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", v.x(), v.y());
    out << buf;
  }
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

void save_schur(const std::string& path, const SchurOperator& op) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  char header[16] = {'S', 'C', 'H', 'R'};
  std::uint32_t k = op.boundary_nodes;
  std::memcpy(header + 4, &k, 4);
  out.write(header, sizeof header);
  const int d = 2 * op.boundary_nodes;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      double v = op.S(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

SchurOperator load_schur(const std::string& path) {
  std::string data = read_file(path);
  if (data.size() < 16 || std::memcmp(data.data(), "SCHR", 4) != 0)
    throw IoError(path + ": missing SCHR header");
  std::uint32_t k = 0;
  std::memcpy(&k, data.data() + 4, 4);
  const std::size_t d = 2 * std::size_t(k);
  if (data.size() != 16 + d * d * sizeof(double))
    throw IoError(path + ": size does not match header");
  SchurOperator op;
  op.boundary_nodes = int(k);
  op.S.resize(d, d);
  op.interior_map.resize(0, d);
  const char* at = data.data() + 16;
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      double v;
      std::memcpy(&v, at, sizeof v);
      at += sizeof v;
      op.S(r, c) = v;
    }
  return op;
}

}  // namespace elastmatch
