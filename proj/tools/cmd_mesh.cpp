#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "elastmatch/io.hpp"
#include "elastmatch/meshing.hpp"
#include "elastmatch/svg.hpp"

namespace elastmatch::cli {

int run_mesh(const MeshFlags& f) {
  if (f.max_area < 0.0) throw std::invalid_argument("--max-area must be >= 0");
  if (f.min_angle <= 0.0 || f.min_angle >= 60.0)
    throw std::invalid_argument("--min-angle must lie in (0, 60)");
  Polygon shape = single_ring(load_shape(f.shape), "shape");
  MesherOptions opts;
  opts.max_triangle_area = f.max_area;
  opts.min_angle_deg = f.min_angle;
  TriMesh mesh = triangulate(shape, opts);

  std::filesystem::create_directories(f.out);
  save_mesh_off(f.out + "/mesh.off", mesh);
  save_mesh_svg(f.out + "/mesh.svg", mesh);
  std::printf("nodes %d\n", mesh.node_count());
  std::printf("boundary %d\n", mesh.boundary_count());
  std::printf("triangles %d\n", mesh.triangle_count());
  return kExitOk;
}

}  // namespace elastmatch::cli
