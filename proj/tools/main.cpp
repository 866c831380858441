#include <CLI11.hpp>

#include <cstdio>
#include <functional>

#include "commands.hpp"
#include "elastmatch/conic.hpp"
#include "elastmatch/elasticity.hpp"
#include "elastmatch/io.hpp"
#include "elastmatch/meshing.hpp"

namespace {

namespace ec = elastmatch::cli;

int dispatch(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const elastmatch::MeshFailure& e) {
    std::fprintf(stderr, "mesh failure: %s\n", e.what());
    return ec::kExitMeshFailure;
  } catch (const elastmatch::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return ec::kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return ec::kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return ec::kExitNumerical;
  }
}

void add_match_flags(CLI::App* c, ec::MatchFlags& f) {
  c->add_option("source", f.source, "source shape, JSON or CSV")->required();
  c->add_option("target", f.target, "target shape, JSON or CSV")->required();
  c->add_option("--alpha", f.alpha, "symmetric-difference weight, 0 picks an area-scaled default");
  c->add_option("--beta", f.beta, "step localization weight");
  c->add_option("--max-iters", f.max_iters, "outer iteration budget");
  c->add_option("--stop-fraction", f.stop_fraction,
                "stop once symdiff/(area(source)+area(target)) drops below this");
  c->add_option("--fd-step", f.fd_step, "area gradient probe step in input units, 0 auto");
  c->add_option("--distortion-bound", f.distortion_bound,
                "cap per-triangle conformal distortion (must exceed 1)");
  c->add_option("--mu", f.mu, "shear modulus");
  c->add_option("--lambda", f.lambda, "first Lame parameter");
  c->add_option("--mesh", f.mesh_path, "prebuilt OFF triangulation of the source");
  c->add_option("--out", f.out, "output directory");
  c->add_option("--seed", f.seed, "reserved; runs are deterministic");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastic shape matching by symmetric-difference minimization"};
  app.require_subcommand(1);

  ec::MatchFlags match_flags;
  ec::MatchFlags compare_flags;
  ec::SymdiffFlags symdiff_flags;
  ec::MeshFlags mesh_flags;

  CLI::App* cmd_match =
      app.add_subcommand("match", "deform a source shape onto a target and log the run");
  add_match_flags(cmd_match, match_flags);

  CLI::App* cmd_compare = app.add_subcommand(
      "compare", "run the symmetric-difference matcher and the nearest-point baseline side by side");
  add_match_flags(cmd_compare, compare_flags);

  CLI::App* cmd_symdiff =
      app.add_subcommand("symdiff", "symmetric-difference area of two shapes");
  cmd_symdiff->add_option("a", symdiff_flags.a, "first shape")->required();
  cmd_symdiff->add_option("b", symdiff_flags.b, "second shape")->required();
  cmd_symdiff->add_option("--svg", symdiff_flags.svg, "draw the clipped region to this file");
  cmd_symdiff->add_option("--gradient", symdiff_flags.gradient,
                          "write per-vertex normal derivatives of the area to this CSV");

  CLI::App* cmd_mesh = app.add_subcommand("mesh", "triangulate a shape and write OFF plus SVG");
  cmd_mesh->add_option("shape", mesh_flags.shape, "shape to triangulate")->required();
  cmd_mesh->add_option("--out", mesh_flags.out, "output directory");
  cmd_mesh->add_option("--max-area", mesh_flags.max_area, "triangle area cap, 0 auto");
  cmd_mesh->add_option("--min-angle", mesh_flags.min_angle, "interior angle bound in degrees");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : ec::kExitValidation;
  }

  if (cmd_match->parsed()) return dispatch([&] { return ec::run_match(match_flags); });
  if (cmd_compare->parsed()) return dispatch([&] { return ec::run_compare(compare_flags); });
  if (cmd_symdiff->parsed()) return dispatch([&] { return ec::run_symdiff(symdiff_flags); });
  if (cmd_mesh->parsed()) return dispatch([&] { return ec::run_mesh(mesh_flags); });
  return ec::kExitValidation;
}
