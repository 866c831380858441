#pragma once

#include <stdexcept>
#include <string>

#include "elastmatch/elasticity.hpp"
#include "elastmatch/geometry.hpp"
#include "elastmatch/meshing.hpp"

namespace elastmatch {

// File missing, malformed, or failing the documented format constraints.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reads a shape from a .json document {"rings":[{"role":"outer"|"hole",
// "points":[[x,y],...]},...]} or, for any other extension, a CSV of "x,y"
// lines forming a single outer ring (an optional "x,y" header is skipped).
// Ring orientations are canonicalized: outer CCW, hole CW. Every ring must
// be simple with at least 3 vertices and finite coordinates.
PolygonSet load_shape(const std::string& path);

// Writes the JSON document above. Round-trips exactly: doubles are printed
// with enough digits to reparse to the same bits.
void save_shape(const std::string& path, const PolygonSet& shape);

// OFF-style mesh: header "OFF", counts "N F 0", N lines "x y 0", F lines
// "3 i j k". The loader flips triangles to CCW and recovers boundary_loop
// from the edges used by exactly one triangle, which must form one cycle
// (started at the smallest node id for determinism).
TriMesh load_mesh_off(const std::string& path);
void save_mesh_off(const std::string& path, const TriMesh& mesh);

// Binary dump of a condensed boundary operator: 16-byte header (magic
// "SCHR", u32 K, 8 reserved zero bytes), then the 2K x 2K matrix S in
// row-major doubles. The interior-recovery map is not stored; a loaded
// operator computes forces but cannot extend displacements inward.
void save_schur(const std::string& path, const SchurOperator& op);
SchurOperator load_schur(const std::string& path);

}  // namespace elastmatch
