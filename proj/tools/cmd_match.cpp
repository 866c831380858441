#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "elastmatch/io.hpp"
#include "elastmatch/svg.hpp"
#include "elastmatch/symdiff.hpp"

namespace elastmatch::cli {
namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json point_list(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; 2 * i + 1 < v.size(); ++i) arr.push_back({v[2 * i], v[2 * i + 1]});
  return arr;
}

SvgArrows vertex_arrows(const Polygon& base, const Eigen::VectorXd& vec) {
  SvgArrows a;
  for (int i = 0; i < base.size(); ++i) {
    a.base.push_back(base[i]);
    a.vec.emplace_back(vec[2 * i], vec[2 * i + 1]);
  }
  return a;
}

// The mesh flag supplies a triangulation of the source, not a different
// source; anything else would make the manifest lie about the inputs.
void require_matching_boundary(const TriMesh& mesh, const Polygon& source) {
  bool ok = mesh.boundary_count() == source.size();
  for (int i = 0; ok && i < source.size(); ++i)
    ok = mesh.nodes[mesh.boundary_loop[i]] == source[i];
  if (!ok) throw std::invalid_argument("mesh boundary does not match the source ring");
}

}  // namespace

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  os << text;
  if (!os) throw IoError("write failed for " + path);
}

Polygon single_ring(const PolygonSet& s, const std::string& what) {
  if (s.rings.size() != 1 || s.rings[0].role != RingRole::Outer)
    throw std::invalid_argument(what + " must be a single outer ring without holes");
  return s.rings[0].polygon;
}

MatchConfig config_from(const MatchFlags& f) {
  if (f.alpha < 0.0) throw std::invalid_argument("--alpha must be >= 0");
  if (f.beta <= 0.0) throw std::invalid_argument("--beta must be > 0");
  if (f.max_iters < 1) throw std::invalid_argument("--max-iters must be >= 1");
  if (f.stop_fraction <= 0.0) throw std::invalid_argument("--stop-fraction must be > 0");
  if (f.fd_step < 0.0) throw std::invalid_argument("--fd-step must be >= 0");
  if (f.distortion_bound != 0.0 && f.distortion_bound <= 1.0)
    throw std::invalid_argument("--distortion-bound must exceed 1");
  if (f.mu <= 0.0) throw std::invalid_argument("--mu must be > 0");
  if (f.lambda < 0.0) throw std::invalid_argument("--lambda must be >= 0");
  MatchConfig cfg;
  cfg.alpha = f.alpha;
  cfg.beta = f.beta;
  cfg.max_iterations = f.max_iters;
  cfg.stop_fraction = f.stop_fraction;
  cfg.fd_step = f.fd_step;
  cfg.distortion_bound = f.distortion_bound;
  cfg.elastic.mu = f.mu;
  cfg.elastic.lambda = f.lambda;
  return cfg;
}

json config_echo(const MatchFlags& f) {
  return json{{"alpha", f.alpha},
              {"beta", f.beta},
              {"max_iters", f.max_iters},
              {"stop_fraction", f.stop_fraction},
              {"fd_step", f.fd_step},
              {"distortion_bound", f.distortion_bound},
              {"mu", f.mu},
              {"lambda", f.lambda},
              {"seed", f.seed}};
}

json inputs_echo(const MatchFlags& f) {
  return json{{"source", f.source},
              {"target", f.target},
              {"mesh", f.mesh_path.empty() ? json() : json(f.mesh_path)}};
}

void write_iterations_csv(const std::string& path, const std::vector<IterationRecord>& rows) {
  std::string text = "iter,area_abs,area_fraction,force_norm,max_cd,mean_cd,flipped,solver_status\n";
  for (const IterationRecord& r : rows) {
    text += std::to_string(r.iter) + ',' + fmt17(r.area_abs) + ',' + fmt17(r.area_fraction) +
            ',' + fmt17(r.force_norm) + ',' + fmt17(r.max_cd) + ',' + fmt17(r.mean_cd) + ',' +
            std::to_string(r.flipped) + ',' + r.solver_status + '\n';
  }
  write_text_file(path, text);
}

void write_result_json(const std::string& path, const MatchResult& r) {
  json doc;
  doc["u_B"] = point_list(r.displacement);
  doc["u_I"] = point_list(r.interior_displacement);
  doc["interior_nodes"] = r.interior_node_ids;
  doc["forces"] = point_list(r.boundary_forces);
  doc["stop_reason"] = r.stop_reason;
  doc["final_area"] = r.final_area;
  doc["final_fraction"] = r.final_fraction;
  doc["iterations"] = r.iterations.size();
  write_text_file(path, doc.dump(1, '\t') + "\n");
}

void write_final_overlay(const std::string& path, const Polygon& target, const MatchResult& r) {
  save_overlay_svg(path, {{r.deformed, "#1f77b4"}, {target, "#d62728"}},
                   vertex_arrows(r.deformed, r.boundary_forces));
}

int run_match(const MatchFlags& f) {
  auto t0 = std::chrono::steady_clock::now();
  Polygon source = single_ring(load_shape(f.source), "source");
  Polygon target = single_ring(load_shape(f.target), "target");
  PolygonSet tset = PolygonSet::from_outer(target);
  TriMesh supplied;
  if (!f.mesh_path.empty()) {
    supplied = load_mesh_off(f.mesh_path);
    require_matching_boundary(supplied, source);
  }
  MatchConfig cfg = config_from(f);
  double t_load = seconds_since(t0);

  std::filesystem::create_directories(f.out);
  {
    DeformedBoundary db(source, Eigen::VectorXd::Zero(2 * source.size()));
    SymdiffGradient g = central_gradient(db, tset, f.fd_step);
    save_overlay_svg(f.out + "/overlay_init.svg", {{source, "#1f77b4"}, {target, "#d62728"}},
                     vertex_arrows(source, restoring_force(g)));
  }

  MatchResult res;
  try {
    res = f.mesh_path.empty() ? match(source, target, cfg) : match(supplied, target, cfg);
  } catch (const std::exception& e) {
    write_iterations_csv(f.out + "/iterations.csv", {});
    json manifest{{"inputs", inputs_echo(f)},
                  {"config", config_echo(f)},
                  {"version", ELASTMATCH_VERSION},
                  {"stages_seconds", {{"load", t_load}, {"match", seconds_since(t0) - t_load}}},
                  {"termination", std::string("error: ") + e.what()}};
    write_text_file(f.out + "/manifest.json", manifest.dump(1, '\t') + "\n");
    throw;
  }
  double t_match = seconds_since(t0) - t_load;

  write_final_overlay(f.out + "/overlay_final.svg", target, res);
  write_iterations_csv(f.out + "/iterations.csv", res.iterations);
  write_result_json(f.out + "/result.json", res);
  json manifest{{"inputs", inputs_echo(f)},
                {"config", config_echo(f)},
                {"version", ELASTMATCH_VERSION},
                {"stages_seconds",
                 {{"load", t_load},
                  {"match", t_match},
                  {"write", seconds_since(t0) - t_load - t_match}}},
                {"termination", res.stop_reason}};
  write_text_file(f.out + "/manifest.json", manifest.dump(1, '\t') + "\n");

  std::printf("iterations %d\n", res.iterations.empty() ? 0 : res.iterations.back().iter);
  std::printf("final_fraction %.12g\n", res.final_fraction);
  std::printf("stop %s\n", res.stop_reason.c_str());
  if (res.stop_reason == "solver_failure" || res.stop_reason == "collapsed") return kExitNumerical;
  if (res.stop_reason == "no_overlap") return kExitValidation;
  return kExitOk;
}

}  // namespace elastmatch::cli
