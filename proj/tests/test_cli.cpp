#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "elastmatch/geometry.hpp"
#include "elastmatch/io.hpp"
#include "elastmatch/meshing.hpp"

using namespace elastmatch;
namespace fs = std::filesystem;

namespace {

struct RunOutcome {
  int exit_code = -1;
  std::string out;
};

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "elastmatch_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunOutcome run_cli(const std::string& args) {
  fs::path log = work_dir() / "stdout.txt";
  std::string cmd = std::string(ELASTMATCH_CLI) + " " + args + " > " + log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  RunOutcome r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(log);
  return r;
}

fs::path write_square(const std::string& name, double lo, double hi) {
  Polygon p;
  p.vertices = {{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}};
  fs::path path = work_dir() / name;
  save_shape(path.string(), PolygonSet::from_outer(p));
  return path;
}

std::string data_shape(const std::string& name) {
  return std::string(ELASTMATCH_DATA_DIR) + "/shapes/" + name;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("match on an identical pair logs one initial row at fraction zero") {
  fs::path shape = write_square("same.json", 0.0, 1.0);
  fs::path out = work_dir() / "identity";
  RunOutcome r =
      run_cli("match " + shape.string() + " " + shape.string() + " --out " + out.string());
  CHECK(r.exit_code == 0);
  std::vector<std::string> rows = lines_of(slurp(out / "iterations.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "iter,area_abs,area_fraction,force_norm,max_cd,mean_cd,flipped,solver_status");
  CHECK(rows[1].substr(0, 4) == "0,0,");
  CHECK(rows[1].find("initial") != std::string::npos);
  for (const char* name : {"overlay_init.svg", "overlay_final.svg", "result.json",
                           "manifest.json", "iterations.csv"})
    CHECK(fs::exists(out / name));
}

TEST_CASE("match reruns write bit-identical logs") {
  fs::path a = work_dir() / "det_a";
  fs::path b = work_dir() / "det_b";
  std::string pair = data_shape("star.json") + " " + data_shape("star_translated.json");
  CHECK(run_cli("match " + pair + " --out " + a.string()).exit_code == 0);
  CHECK(run_cli("match " + pair + " --out " + b.string()).exit_code == 0);
  for (const char* name : {"iterations.csv", "result.json", "overlay_init.svg",
                           "overlay_final.svg"})
    CHECK(slurp(a / name) == slurp(b / name));
}

TEST_CASE("validation failures exit with code 2") {
  CHECK(run_cli("match missing.json also_missing.json").exit_code == 2);
  CHECK(run_cli("mesh missing.json").exit_code == 2);
  {
    std::ofstream os(work_dir() / "bowtie.csv");
    os << "0,0\n1,1\n1,0\n0,1\n";
  }
  CHECK(run_cli("mesh " + (work_dir() / "bowtie.csv").string()).exit_code == 2);
  std::string pair = data_shape("star.json") + " " + data_shape("star.json");
  CHECK(run_cli("match " + pair + " --distortion-bound 0.5").exit_code == 2);
  CHECK(run_cli("match " + pair + " --beta 0").exit_code == 2);
  CHECK(run_cli("match " + pair + " --no-such-flag 1").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);
}

TEST_CASE("disjoint shapes exit with code 2 and still write the log") {
  fs::path a = write_square("dj_a.json", 0.0, 1.0);
  fs::path b = write_square("dj_b.json", 3.0, 4.0);
  fs::path out = work_dir() / "disjoint";
  RunOutcome r = run_cli("match " + a.string() + " " + b.string() + " --out " + out.string());
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("no_overlap") != std::string::npos);
  std::vector<std::string> rows = lines_of(slurp(out / "iterations.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("symdiff prints the clipped area and fraction") {
  fs::path a = write_square("sq02.json", 0.0, 2.0);
  fs::path b = write_square("sq13.json", 1.0, 3.0);
  RunOutcome same = run_cli("symdiff " + a.string() + " " + a.string());
  CHECK(same.exit_code == 0);
  CHECK(same.out.find("symdiff_area 0\n") != std::string::npos);
  RunOutcome r = run_cli("symdiff " + a.string() + " " + b.string());
  CHECK(r.exit_code == 0);
  double area = 0.0, fraction = 0.0;
  REQUIRE(std::sscanf(r.out.c_str(), "symdiff_area %lf\nfraction %lf", &area, &fraction) == 2);
  CHECK(area == doctest::Approx(6.0).epsilon(1e-7));
  CHECK(fraction == doctest::Approx(0.75).epsilon(1e-7));
}

TEST_CASE("symdiff gradient flag writes one derivative row per vertex") {
  fs::path a = write_square("g_a.json", 0.0, 2.0);
  fs::path b = write_square("g_b.json", 1.0, 3.0);
  fs::path csv = work_dir() / "grad.csv";
  fs::path svg = work_dir() / "region.svg";
  RunOutcome r = run_cli("symdiff " + a.string() + " " + b.string() + " --gradient " +
                         csv.string() + " --svg " + svg.string());
  CHECK(r.exit_code == 0);
  std::vector<std::string> rows = lines_of(slurp(csv));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "vertex,x,y,nx,ny,slope");
  CHECK(slurp(svg).find("<svg") != std::string::npos);
}

TEST_CASE("mesh writes a loadable OFF with the shape's area") {
  fs::path out = work_dir() / "meshed";
  RunOutcome r = run_cli("mesh " + data_shape("ellipse.json") + " --out " + out.string());
  CHECK(r.exit_code == 0);
  TriMesh mesh = load_mesh_off((out / "mesh.off").string());
  int printed_triangles = 0;
  std::sscanf(r.out.c_str(), "nodes %*d\nboundary %*d\ntriangles %d", &printed_triangles);
  CHECK(printed_triangles == mesh.triangle_count());
  CHECK(mesh.triangle_count() >= 200);
  CHECK(mesh.triangle_count() <= 700);
  double mesh_area = 0.0;
  for (const auto& t : mesh.triangles)
    mesh_area += triangle_area(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
  PolygonSet shape = load_shape(data_shape("ellipse.json"));
  CHECK(mesh_area == doctest::Approx(set_area(shape)).epsilon(1e-9));
}

TEST_CASE("match accepts a prebuilt mesh only when its boundary matches the source") {
  fs::path meshed = work_dir() / "pre";
  REQUIRE(run_cli("mesh " + data_shape("star.json") + " --out " + meshed.string()).exit_code == 0);
  std::string off = (meshed / "mesh.off").string();
  fs::path out = work_dir() / "premesh_run";
  RunOutcome ok = run_cli("match " + data_shape("star.json") + " " +
                          data_shape("star_translated.json") + " --mesh " + off + " --out " +
                          out.string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("stop converged") != std::string::npos);
  RunOutcome mismatch = run_cli("match " + data_shape("ellipse.json") + " " +
                                data_shape("rectangle.json") + " --mesh " + off);
  CHECK(mismatch.exit_code == 2);
}

TEST_CASE("compare writes side-by-side metrics for both methods") {
  fs::path out = work_dir() / "cmp";
  RunOutcome r = run_cli("compare " + data_shape("star.json") + " " +
                         data_shape("star_translated.json") + " --stop-fraction 0.007 --out " +
                         out.string());
  CHECK(r.exit_code == 0);
  std::vector<std::string> rows = lines_of(slurp(out / "compare.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "method,iterations,force_norm,max_CD,mean_CD,final_fraction");
  CHECK(rows[1].substr(0, 8) == "symdiff,");
  CHECK(rows[2].substr(0, 14) == "nearest_point,");
  for (const char* name : {"iterations_symdiff.csv", "iterations_nearest.csv",
                           "result_symdiff.json", "result_nearest.json", "manifest.json"})
    CHECK(fs::exists(out / name));

  // Both runs apply the tightened threshold: a run claiming convergence is
  // below it, a run that never got below it exhausts the budget instead.
  for (const char* name : {"symdiff", "nearest"}) {
    std::vector<std::string> log =
        lines_of(slurp(out / ("iterations_" + std::string(name) + ".csv")));
    REQUIRE(log.size() >= 2);
    std::string last = log.back();
    size_t p1 = last.find(','), p2 = last.find(',', p1 + 1), p3 = last.find(',', p2 + 1);
    double fraction = std::stod(last.substr(p2 + 1, p3 - p2 - 1));
    std::string result = slurp(out / ("result_" + std::string(name) + ".json"));
    bool converged = result.find("\"stop_reason\": \"converged\"") != std::string::npos;
    if (converged)
      CHECK(fraction < 0.007);
    else
      CHECK(fraction >= 0.007);
  }
  std::string sd_result = slurp(out / "result_symdiff.json");
  CHECK(sd_result.find("\"stop_reason\": \"converged\"") != std::string::npos);
}
