#include "commands.hpp"

#include <cstdio>
#include <string>

#include "elastmatch/io.hpp"
#include "elastmatch/svg.hpp"
#include "elastmatch/symdiff.hpp"

namespace elastmatch::cli {

int run_symdiff(const SymdiffFlags& f) {
  PolygonSet a = load_shape(f.a);
  PolygonSet b = load_shape(f.b);
  double sd = symdiff_area(a, b);
  double total = set_area(a) + set_area(b);
  std::printf("symdiff_area %.12g\n", sd);
  std::printf("fraction %.12g\n", total > 0.0 ? sd / total : 0.0);

  if (!f.svg.empty()) {
    std::vector<SvgOutline> outlines;
    for (const auto& ring : a.rings) outlines.push_back({ring.polygon, "#999999"});
    for (const auto& ring : b.rings) outlines.push_back({ring.polygon, "#d62728"});
    PolygonSet region = clip(a, b, BoolOp::SymmetricDifference);
    for (const auto& ring : region.rings) outlines.push_back({ring.polygon, "#1f77b4"});
    save_overlay_svg(f.svg, outlines);
  }

  if (!f.gradient.empty()) {
    Polygon ring = single_ring(a, "gradient input");
    DeformedBoundary db(ring, Eigen::VectorXd::Zero(2 * ring.size()));
    SymdiffGradient g = central_gradient(db, b);
    std::string text = "vertex,x,y,nx,ny,slope\n";
    for (int i = 0; i < ring.size(); ++i) {
      char buf[192];
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, ring[i].x(),
                    ring[i].y(), g.normals[i].x(), g.normals[i].y(), g.slopes[i]);
      text += buf;
    }
    write_text_file(f.gradient, text);
  }
  return kExitOk;
}

}  // namespace elastmatch::cli
