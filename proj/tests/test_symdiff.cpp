#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "elastmatch/symdiff.hpp"
#include "support/shapes.hpp"

using namespace elastmatch;
using Eigen::VectorXd;

namespace {

// unit square with edge midpoints, CCW from the origin
Polygon square_with_midpoints() {
  return Polygon({{0, 0}, {0.5, 0}, {1, 0}, {1, 0.5}, {1, 1}, {0.5, 1}, {0, 1}, {0, 0.5}});
}

}  // namespace

TEST_CASE("area at zero displacement matches plain symdiff") {
  Polygon s = square_with_midpoints();
  PolygonSet target = PolygonSet::from_outer(testsupport::rectangle({0.2, 0}, {1.2, 1}));
  DeformedBoundary db(s, VectorXd::Zero(2 * s.size()));
  CHECK(area_at(db, target) == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(overlap_area(db, target) == doctest::Approx(0.8).epsilon(1e-9));
}

TEST_CASE("displacement size is validated") {
  Polygon s = square_with_midpoints();
  CHECK_THROWS_AS(DeformedBoundary(s, VectorXd::Zero(7)), std::invalid_argument);
}

TEST_CASE("edge midpoint slopes have closed form") {
  // Source square xor the same square shifted 0.2 right. Pushing the right
  // edge midpoint outward sweeps a triangle of area h/2 entirely into the
  // target, so the slope is exactly -1/2; the left midpoint sweeps the same
  // area outside, slope +1/2.
  Polygon s = square_with_midpoints();
  PolygonSet target = PolygonSet::from_outer(testsupport::rectangle({0.2, 0}, {1.2, 1}));
  DeformedBoundary db(s, VectorXd::Zero(2 * s.size()));

  SymdiffGradient grad = gradient(db, target, 0.05);
  CHECK(grad.base_area == doctest::Approx(0.4).epsilon(1e-9));

  const int right_mid = 3;  // (1, 0.5)
  const int left_mid = 7;   // (0, 0.5)
  CHECK(grad.normals[right_mid].x() == doctest::Approx(1.0));
  CHECK(grad.normals[right_mid].y() == doctest::Approx(0.0));
  CHECK(grad.slopes[right_mid] == doctest::Approx(-0.5).epsilon(1e-7));
  CHECK(grad.slopes[left_mid] == doctest::Approx(0.5).epsilon(1e-7));

  VectorXd f = restoring_force(grad);
  // right midpoint pulled outward (+x), left midpoint pulled inward (+x)
  CHECK(f[2 * right_mid] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(f[2 * left_mid] == doctest::Approx(0.5).epsilon(1e-7));

  // piecewise linear here: halving the step leaves the slope unchanged
  SymdiffGradient grad2 = gradient(db, target, 0.025);
  CHECK(grad2.slopes[right_mid] == doctest::Approx(grad.slopes[right_mid]).epsilon(1e-9));
}

TEST_CASE("gradient costs exactly K+1 clips") {
  Polygon s = square_with_midpoints();
  PolygonSet target = PolygonSet::from_outer(testsupport::rectangle({0.3, 0.1}, {1.2, 1.3}));
  DeformedBoundary db(s, VectorXd::Zero(2 * s.size()));
  const auto before = clip_call_count();
  gradient(db, target);
  CHECK(clip_call_count() == before + s.size() + 1);
  const auto before2 = clip_call_count();
  area_at(db, target);
  CHECK(clip_call_count() == before2 + 1);
}

TEST_CASE("perfect alignment is a local minimum") {
  std::mt19937 rng(31);
  Polygon s = testsupport::random_blob(rng, 24, 1.0, {0, 0}, 0.2);
  PolygonSet target = PolygonSet::from_outer(s);
  DeformedBoundary db(s, VectorXd::Zero(2 * s.size()));
  SymdiffGradient grad = gradient(db, target, 1e-4);
  CHECK(grad.base_area == doctest::Approx(0.0));
  for (int i = 0; i < s.size(); ++i) CHECK(grad.slopes[i] > 0.0);
}

TEST_CASE("normal slopes agree with the full central-difference gradient") {
  std::mt19937 rng(12);
  Polygon s = testsupport::random_blob(rng, 16, 1.0, {0, 0}, 0.15);
  PolygonSet target =
      PolygonSet::from_outer(testsupport::random_blob(rng, 20, 1.05, {0.15, 0.1}, 0.15));
  VectorXd u0 = VectorXd::Zero(2 * s.size());
  DeformedBoundary db(s, u0);
  const double h = 1e-4;
  SymdiffGradient grad = gradient(db, target, h);

  double max_slope = grad.slopes.cwiseAbs().maxCoeff();
  for (int i = 0; i < s.size(); ++i) {
    Eigen::Vector2d central;
    for (int c = 0; c < 2; ++c) {
      VectorXd up = u0, dn = u0;
      up[2 * i + c] += h;
      dn[2 * i + c] -= h;
      central[c] = (area_at(DeformedBoundary(s, up), target) -
                    area_at(DeformedBoundary(s, dn), target)) /
                   (2.0 * h);
    }
    const double normal_component = central.dot(grad.normals[i]);
    CHECK(std::abs(normal_component - grad.slopes[i]) <=
          std::max(0.05 * std::abs(grad.slopes[i]), 1e-2 * max_slope));
  }
}

TEST_CASE("default step scales with the configuration") {
  std::mt19937 rng(9);
  Polygon s = testsupport::random_blob(rng, 20, 1.0, {0, 0}, 0.2);
  PolygonSet target = PolygonSet::from_outer(testsupport::random_blob(rng, 20, 1.0, {0.2, 0}, 0.2));
  DeformedBoundary db(s, VectorXd::Zero(2 * s.size()));
  SymdiffGradient a = gradient(db, target);          // default step
  SymdiffGradient b = gradient(db, target, 4.2e-3);  // about the same magnitude
  for (int i = 0; i < s.size(); ++i)
    CHECK(std::abs(a.slopes[i] - b.slopes[i]) <= 0.1 * a.slopes.cwiseAbs().maxCoeff() + 1e-9);
}
