#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "elastmatch/geometry.hpp"
#include "elastmatch/io.hpp"
#include "elastmatch/matcher.hpp"
#include "elastmatch/meshing.hpp"

namespace py = pybind11;
using namespace elastmatch;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Polygon polygon_from(const DoubleArray& arr, const char* what) {
  if (arr.ndim() != 2 || arr.shape(1) != 2)
    throw std::invalid_argument(std::string(what) + " must be an array of shape (K, 2)");
  if (arr.shape(0) < 3)
    throw std::invalid_argument(std::string(what) + " needs at least three vertices");
  Polygon p;
  p.vertices.reserve(arr.shape(0));
  auto view = arr.unchecked<2>();
  for (py::ssize_t i = 0; i < arr.shape(0); ++i) p.vertices.emplace_back(view(i, 0), view(i, 1));
  return p;
}

py::array_t<double> points_to_array(const std::vector<Vec2>& pts) {
  py::array_t<double> arr({static_cast<py::ssize_t>(pts.size()), py::ssize_t(2)});
  auto view = arr.mutable_unchecked<2>();
  for (size_t i = 0; i < pts.size(); ++i) {
    view(i, 0) = pts[i].x();
    view(i, 1) = pts[i].y();
  }
  return arr;
}

py::array_t<double> interleaved_to_array(const Eigen::VectorXd& v) {
  py::array_t<double> arr({static_cast<py::ssize_t>(v.size() / 2), py::ssize_t(2)});
  auto view = arr.mutable_unchecked<2>();
  for (py::ssize_t i = 0; 2 * i + 1 < v.size(); ++i) {
    view(i, 0) = v[2 * i];
    view(i, 1) = v[2 * i + 1];
  }
  return arr;
}

py::array_t<int> triangles_to_array(const std::vector<std::array<int, 3>>& tris) {
  py::array_t<int> arr({static_cast<py::ssize_t>(tris.size()), py::ssize_t(3)});
  auto view = arr.mutable_unchecked<2>();
  for (size_t i = 0; i < tris.size(); ++i)
    for (int j = 0; j < 3; ++j) view(i, j) = tris[i][j];
  return arr;
}

MatchConfig config_from_kwargs(double alpha, double beta, int max_iterations,
                               double stop_fraction, double fd_step, double distortion_bound,
                               double mu, double lambda_) {
  MatchConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.max_iterations = max_iterations;
  cfg.stop_fraction = stop_fraction;
  cfg.fd_step = fd_step;
  cfg.distortion_bound = distortion_bound;
  cfg.elastic.mu = mu;
  cfg.elastic.lambda = lambda_;
  return cfg;
}

constexpr const char* kConfigDoc =
    "alpha=0 picks an area-scaled default weight; beta localizes steps; "
    "distortion_bound=0 disables the conformal distortion cap; lambda_ is the "
    "first Lame parameter.";

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Elastic 2D shape matching by symmetric-difference minimization";
  m.attr("__version__") = ELASTMATCH_VERSION;

  py::register_exception<IoError>(m, "IoError", PyExc_ValueError);
  py::register_exception<MeshFailure>(m, "MeshFailure", PyExc_RuntimeError);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("iter", &IterationRecord::iter)
      .def_readonly("area_abs", &IterationRecord::area_abs)
      .def_readonly("area_fraction", &IterationRecord::area_fraction)
      .def_readonly("force_norm", &IterationRecord::force_norm)
      .def_readonly("max_cd", &IterationRecord::max_cd)
      .def_readonly("mean_cd", &IterationRecord::mean_cd)
      .def_readonly("flipped", &IterationRecord::flipped)
      .def_readonly("solver_status", &IterationRecord::solver_status)
      .def("__repr__", [](const IterationRecord& r) {
        return "IterationRecord(iter=" + std::to_string(r.iter) +
               ", area_fraction=" + std::to_string(r.area_fraction) +
               ", force_norm=" + std::to_string(r.force_norm) + ")";
      });

  py::class_<MatchResult>(m, "MatchResult")
      .def_readonly("stop_reason", &MatchResult::stop_reason)
      .def_readonly("final_area", &MatchResult::final_area)
      .def_readonly("final_fraction", &MatchResult::final_fraction)
      .def_readonly("iterations", &MatchResult::iterations)
      .def_readonly("interior_nodes", &MatchResult::interior_node_ids)
      .def_property_readonly(
          "deformed", [](const MatchResult& r) { return points_to_array(r.deformed.vertices); })
      .def_property_readonly(
          "displacement",
          [](const MatchResult& r) { return interleaved_to_array(r.displacement); })
      .def_property_readonly(
          "forces", [](const MatchResult& r) { return interleaved_to_array(r.boundary_forces); })
      .def_property_readonly(
          "interior_displacement",
          [](const MatchResult& r) { return interleaved_to_array(r.interior_displacement); })
      .def_property_readonly(
          "mesh_nodes", [](const MatchResult& r) { return points_to_array(r.mesh.nodes); })
      .def_property_readonly(
          "mesh_triangles",
          [](const MatchResult& r) { return triangles_to_array(r.mesh.triangles); })
      .def("__repr__", [](const MatchResult& r) {
        return "MatchResult(stop_reason='" + r.stop_reason +
               "', final_fraction=" + std::to_string(r.final_fraction) + ")";
      });

  m.def(
      "match",
      [](const DoubleArray& source, const DoubleArray& target, double alpha, double beta,
         int max_iterations, double stop_fraction, double fd_step, double distortion_bound,
         double mu, double lambda_) {
        MatchConfig cfg = config_from_kwargs(alpha, beta, max_iterations, stop_fraction, fd_step,
                                             distortion_bound, mu, lambda_);
        Polygon s = polygon_from(source, "source");
        Polygon t = polygon_from(target, "target");
        py::gil_scoped_release release;
        return match(s, t, cfg);
      },
      py::arg("source"), py::arg("target"), py::kw_only(), py::arg("alpha") = 0.0,
      py::arg("beta") = 1.0, py::arg("max_iterations") = 50, py::arg("stop_fraction") = 0.01,
      py::arg("fd_step") = 0.0, py::arg("distortion_bound") = 0.0, py::arg("mu") = 1.0,
      py::arg("lambda_") = 0.0,
      (std::string("Deform source onto target, minimizing elastic forces plus the "
                   "symmetric difference. ") +
       kConfigDoc)
          .c_str());

  m.def(
      "nearest_point_match",
      [](const DoubleArray& source, const DoubleArray& target, double alpha, double beta,
         int max_iterations, double stop_fraction, double fd_step, double distortion_bound,
         double mu, double lambda_) {
        MatchConfig cfg = config_from_kwargs(alpha, beta, max_iterations, stop_fraction, fd_step,
                                             distortion_bound, mu, lambda_);
        Polygon s = polygon_from(source, "source");
        Polygon t = polygon_from(target, "target");
        py::gil_scoped_release release;
        return nearest_point_match(s, t, cfg);
      },
      py::arg("source"), py::arg("target"), py::kw_only(), py::arg("alpha") = 0.0,
      py::arg("beta") = 1.0, py::arg("max_iterations") = 50, py::arg("stop_fraction") = 0.01,
      py::arg("fd_step") = 0.0, py::arg("distortion_bound") = 0.0, py::arg("mu") = 1.0,
      py::arg("lambda_") = 0.0,
      "Baseline that pulls each boundary vertex toward its nearest point on the target.");

  m.def(
      "symdiff_area",
      [](const DoubleArray& a, const DoubleArray& b) {
        return symdiff_area(PolygonSet::from_outer(polygon_from(a, "a")),
                            PolygonSet::from_outer(polygon_from(b, "b")));
      },
      py::arg("a"), py::arg("b"), "Area of the symmetric difference of two simple polygons.");

  m.def(
      "triangulate",
      [](const DoubleArray& polygon, double max_area, double min_angle) {
        MesherOptions opts;
        opts.max_triangle_area = max_area;
        opts.min_angle_deg = min_angle;
        TriMesh mesh = triangulate(polygon_from(polygon, "polygon"), opts);
        return py::make_tuple(points_to_array(mesh.nodes), triangles_to_array(mesh.triangles),
                              mesh.boundary_loop);
      },
      py::arg("polygon"), py::kw_only(), py::arg("max_area") = 0.0, py::arg("min_angle") = 25.0,
      "Triangulate a simple polygon; returns (nodes, triangles, boundary_loop). The "
      "polygon's vertices are kept as the first nodes, in order.");

  m.def(
      "load_shape",
      [](const std::string& path) {
        PolygonSet s = load_shape(path);
        py::list rings;
        for (const auto& ring : s.rings)
          rings.append(py::make_tuple(points_to_array(ring.polygon.vertices),
                                      ring.role == RingRole::Outer ? "outer" : "hole"));
        return rings;
      },
      py::arg("path"), "Load a shape file; returns a list of (vertices, role) tuples.");

  m.def(
      "save_shape",
      [](const std::string& path, const DoubleArray& polygon) {
        save_shape(path, PolygonSet::from_outer(polygon_from(polygon, "polygon")));
      },
      py::arg("path"), py::arg("polygon"), "Write a single-ring shape JSON file.");
}
