#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "elastmatch/elasticity.hpp"
#include "elastmatch/io.hpp"
#include "elastmatch/meshing.hpp"
#include "support/shapes.hpp"

using namespace elastmatch;
using testsupport::rectangle;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("shape json round-trips exactly") {
  PolygonSet shape;
  shape.rings.push_back({rectangle({-1.25, -0.5}, {2.0, 1.0 / 3.0}), RingRole::Outer});
  shape.rings.push_back(
      {rectangle({0.1, -0.2}, {0.7, 0.1}).reversed(), RingRole::Hole});
  auto path = temp_path("io_roundtrip.json");
  save_shape(path.string(), shape);
  PolygonSet back = load_shape(path.string());

  REQUIRE(back.rings.size() == 2);
  CHECK(back.rings[0].role == RingRole::Outer);
  CHECK(back.rings[1].role == RingRole::Hole);
  for (size_t r = 0; r < 2; ++r) {
    REQUIRE(back.rings[r].polygon.size() == shape.rings[r].polygon.size());
    for (int i = 0; i < back.rings[r].polygon.size(); ++i) {
      CHECK(back.rings[r].polygon[i].x() == shape.rings[r].polygon[i].x());
      CHECK(back.rings[r].polygon[i].y() == shape.rings[r].polygon[i].y());
    }
  }

  save_shape(temp_path("io_roundtrip2.json").string(), back);
  CHECK(read_bytes(path) == read_bytes(temp_path("io_roundtrip2.json")));
}

TEST_CASE("shape loader canonicalizes ring orientation") {
  auto path = temp_path("io_orient.json");
  write_text(path,
             R"({"rings":[{"role":"outer","points":[[0,0],[0,1],[1,1],[1,0]]},)"
             R"({"role":"hole","points":[[0.2,0.2],[0.8,0.2],[0.8,0.8],[0.2,0.8]]}]})");
  PolygonSet s = load_shape(path.string());
  CHECK(signed_area(s.rings[0].polygon) > 0.0);
  CHECK(signed_area(s.rings[1].polygon) < 0.0);
}

TEST_CASE("csv loader reads one outer ring") {
  auto path = temp_path("io_ring.csv");
  write_text(path, "x,y\n0,0\n1,0\n1,1\n0,1\n");
  PolygonSet s = load_shape(path.string());
  REQUIRE(s.rings.size() == 1);
  CHECK(s.rings[0].role == RingRole::Outer);
  CHECK(s.rings[0].polygon.size() == 4);
  CHECK(set_area(s) == doctest::Approx(1.0));

  write_text(path, "0,1\n1,1\n1,0\n0,0\n");
  CHECK(signed_area(load_shape(path.string()).rings[0].polygon) > 0.0);
}

TEST_CASE("shape loader rejects malformed input") {
  auto path = temp_path("io_bad.json");
  CHECK_THROWS_AS(load_shape(temp_path("io_missing.json").string()), IoError);

  write_text(path, "{\"rings\": ");
  CHECK_THROWS_AS(load_shape(path.string()), IoError);

  write_text(path, R"({"rings":[{"role":"outer","points":[[0,0],[1,0]]}]})");
  CHECK_THROWS_AS(load_shape(path.string()), IoError);

  write_text(path, R"({"rings":[{"role":"edge","points":[[0,0],[1,0],[1,1]]}]})");
  CHECK_THROWS_AS(load_shape(path.string()), IoError);

  // bowtie: edges cross
  write_text(path, R"({"rings":[{"role":"outer","points":[[0,0],[1,1],[1,0],[0,1]]}]})");
  CHECK_THROWS_AS(load_shape(path.string()), IoError);

  auto csv = temp_path("io_bad.csv");
  write_text(csv, "0,0\n1;0\n1,1\n");
  CHECK_THROWS_AS(load_shape(csv.string()), IoError);
}

TEST_CASE("off mesh round-trips and recovers the boundary loop") {
  Polygon square = rectangle({0.0, 0.0}, {1.0, 1.0});
  MesherOptions coarse;
  coarse.max_triangle_area = 0.5;
  TriMesh mesh = triangulate(square, coarse);
  auto path = temp_path("io_mesh.off");
  save_mesh_off(path.string(), mesh);
  TriMesh back = load_mesh_off(path.string());

  REQUIRE(back.node_count() == mesh.node_count());
  REQUIRE(back.triangle_count() == mesh.triangle_count());
  for (int i = 0; i < mesh.node_count(); ++i) {
    CHECK(back.nodes[i].x() == mesh.nodes[i].x());
    CHECK(back.nodes[i].y() == mesh.nodes[i].y());
  }
  REQUIRE(back.boundary_loop.size() == mesh.boundary_loop.size());
  CHECK(back.boundary_loop == mesh.boundary_loop);
}

TEST_CASE("off loader flips clockwise faces") {
  auto path = temp_path("io_cw.off");
  write_text(path, "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 2 1\n");
  TriMesh mesh = load_mesh_off(path.string());
  auto t = mesh.triangles[0];
  Vec2 a = mesh.nodes[t[1]] - mesh.nodes[t[0]];
  Vec2 b = mesh.nodes[t[2]] - mesh.nodes[t[0]];
  CHECK(a.x() * b.y() - a.y() * b.x() > 0.0);
  CHECK(mesh.boundary_loop.size() == 3);
}

TEST_CASE("off loader rejects broken meshes") {
  auto path = temp_path("io_bad.off");
  write_text(path, "COFF\n3 1 0\n");
  CHECK_THROWS_AS(load_mesh_off(path.string()), IoError);

  write_text(path, "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n");
  CHECK_THROWS_AS(load_mesh_off(path.string()), IoError);

  // two disjoint triangles: boundary splits into two cycles
  write_text(path,
             "OFF\n6 2 0\n0 0 0\n1 0 0\n0 1 0\n5 5 0\n6 5 0\n5 6 0\n"
             "3 0 1 2\n3 3 4 5\n");
  CHECK_THROWS_AS(load_mesh_off(path.string()), IoError);
}

TEST_CASE("schur dump round-trips bit-exactly") {
  Polygon square = rectangle({0.0, 0.0}, {1.0, 1.0});
  MesherOptions coarse;
  coarse.max_triangle_area = 0.5;
  TriMesh mesh = triangulate(square, coarse);
  NodeOrdering ord = order_nodes(mesh);
  SchurOperator op = schur_condense(assemble(mesh, ord));

  auto path = temp_path("io_schur.bin");
  save_schur(path.string(), op);
  SchurOperator back = load_schur(path.string());
  CHECK(back.boundary_nodes == op.boundary_nodes);
  REQUIRE(back.S.rows() == op.S.rows());
  CHECK((back.S - op.S).cwiseAbs().maxCoeff() == 0.0);

  std::string bytes = read_bytes(path);
  write_text(path, bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_schur(path.string()), IoError);
  write_text(path, "NOPE" + bytes.substr(4));
  CHECK_THROWS_AS(load_schur(path.string()), IoError);
}

TEST_CASE("bundled shapes load cleanly") {
  const char* names[] = {"ellipse", "rectangle", "star", "star_translated", "star_bent"};
  for (const char* n : names) {
    PolygonSet s = load_shape(std::string(ELASTMATCH_DATA_DIR "/shapes/") + n + ".json");
    REQUIRE(s.rings.size() == 1);
    CHECK(s.rings[0].polygon.size() >= 60);
    CHECK(signed_area(s.rings[0].polygon) > 0.0);
    CHECK(is_simple(s.rings[0].polygon));
  }
}
