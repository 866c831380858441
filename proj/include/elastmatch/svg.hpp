#pragma once

#include <string>
#include <utility>
#include <vector>

#include "elastmatch/geometry.hpp"
#include "elastmatch/meshing.hpp"

namespace elastmatch {

// A closed outline plus its stroke/fill color (any SVG color string).
struct SvgOutline {
  Polygon ring;
  std::string color;
};

// Arrow field anchored at base[i] with direction vec[i]. Arrows are drawn
// at a common multiplier chosen so the longest one spans about 8% of the
// drawing, and the multiplier is printed in a legend line.
struct SvgArrows {
  std::vector<Vec2> base;
  std::vector<Vec2> vec;
  std::string color = "#2060c0";
};

// Writes a deterministic standalone SVG (fixed 800px width, 5% margin,
// inline styles, no timestamps) showing the outlines and arrows.
void save_overlay_svg(const std::string& path, const std::vector<SvgOutline>& outlines,
                      const SvgArrows& arrows = {});

// Triangulation wireframe with the boundary loop emphasized.
void save_mesh_svg(const std::string& path, const TriMesh& mesh);

}  // namespace elastmatch
