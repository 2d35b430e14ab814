#include <doctest.h>

#include <cmath>
#include <random>

#include "convopt/geometry.hpp"
#include "convopt/shapes.hpp"
#include "convopt/support.hpp"

using namespace convopt;

namespace {

ConvexPolygon unit_square() {
  Matrix2X v(2, 4);
  v << 0.5, -0.5, -0.5, 0.5, 0.5, 0.5, -0.5, -0.5;
  return make_polygon(v);
}

}  // namespace

TEST_CASE("area, perimeter, centroid, diameter of simple polygons") {
  ConvexPolygon sq = unit_square();
  CHECK(polygon_area(sq) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(polygon_perimeter(sq) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(polygon_centroid(sq).norm() <= 1e-14);
  CHECK(polygon_diameter(sq) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  // Dense disk polygon: area pi (1 + O(h^2)).
  ConvexPolygon disk = support_polygon(Vector::Constant(360, 1.0));
  CHECK(std::abs(polygon_area(disk) - kPi) <= 1e-3);
  CHECK(std::abs(polygon_perimeter(disk) - kTwoPi) <= 1e-3);

  // Sampled Reuleaux triangle: area within 1% of (pi - sqrt(3))/2.
  ConvexPolygon reuleaux = support_polygon(sample_support(ShapeDescriptor::reuleaux(1.0), 240));
  double exact = (kPi - std::sqrt(3.0)) / 2;
  CHECK(std::abs(polygon_area(reuleaux) - exact) <= 0.01 * exact);
  CHECK(std::abs(polygon_perimeter(reuleaux) - kPi) <= 2e-3);
}

TEST_CASE("convexity detection flags flipped triples") {
  ConvexPolygon sq = unit_square();
  CHECK(is_convex(sq, 1e-14));
  ConvexPolygon dent = sq;
  dent.vertices.col(2) = Vector2(0.2, 0.2);  // pull a corner inside
  std::vector<Index> bad;
  CHECK_FALSE(is_convex(dent, 1e-14, &bad));
  CHECK_FALSE(bad.empty());
}

TEST_CASE("support function and distances") {
  ConvexPolygon sq = unit_square();
  CHECK(polygon_support(sq, 0.0) == doctest::Approx(0.5));
  CHECK(polygon_support(sq, kPi / 4) == doctest::Approx(std::sqrt(0.5)));
  CHECK(distance_to_polygon({0.2, 0.1}, sq) == 0.0);
  CHECK(distance_to_polygon({1.5, 0.0}, sq) == doctest::Approx(1.0));
  CHECK(distance_to_polygon({1.5, 1.5}, sq) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("hausdorff distance between convex polygons") {
  ConvexPolygon sq = unit_square();
  ConvexPolygon moved = sq;
  moved.vertices.colwise() += Vector2(0.3, 0.0);
  CHECK(hausdorff_distance(sq, moved) == doctest::Approx(0.3).epsilon(1e-12));

  // Alignment removes rigid motions: a rotated translated copy is a match.
  ConvexPolygon reuleaux = support_polygon(sample_support(ShapeDescriptor::reuleaux(1.0), 120));
  ConvexPolygon rotated = reuleaux;
  double phi = 0.7;
  Eigen::Matrix2d R;
  R << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  rotated.vertices = (R * rotated.vertices).colwise() + Vector2(0.4, -0.2);
  CHECK(hausdorff_distance(reuleaux, rotated) > 0.1);
  CHECK(aligned_hausdorff_distance(reuleaux, rotated) <= 5e-3);
}

TEST_CASE("convex hull of a point cloud") {
  Matrix2X pts(2, 7);
  pts << 0, 1, 1, 0, 0.5, 0.2, 0.9, 0, 0, 1, 1, 0.5, 0.2, 0.1;
  ConvexPolygon hull = convex_hull(pts);
  CHECK(hull.size() == 4);
  CHECK(polygon_area(hull) == doctest::Approx(1.0));
  CHECK(is_convex(hull, 1e-14));
}

TEST_CASE("polar polygon: square, disk polygon, involution") {
  // Polar of the side-4 square is the diamond with vertices at distance 1/2.
  Matrix2X v(2, 4);
  v << 2, -2, -2, 2, 2, 2, -2, -2;
  ConvexPolygon polar = polar_polygon(make_polygon(v));
  CHECK(polar.size() == 4);
  CHECK(polygon_area(polar) == doctest::Approx(0.5).epsilon(1e-13));
  for (Index i = 0; i < 4; ++i) CHECK(polar.vertex(i).norm() == doctest::Approx(0.5));

  // Polar of the inscribed n-gon of the R-disk: circumscribed polygon of the
  // 1/R-disk, vertices at 1/(R cos(h/2)).
  ConvexPolygon disk = support_polygon(Vector::Constant(16, 2.0));
  ConvexPolygon dual = polar_polygon(disk);
  double expected = 1.0 / (2.0 * std::cos(grid_step(16) / 2));
  for (Index i = 0; i < dual.size(); ++i)
    CHECK(dual.vertex(i).norm() == doctest::Approx(expected).epsilon(1e-12));

  // Double polar returns the original vertices.
  ConvexPolygon twice = polar_polygon(dual);
  CHECK(twice.size() == disk.size());
  double worst = 0;
  for (Index i = 0; i < disk.size(); ++i)
    worst = std::max(worst, distance_to_polygon(disk.vertex(i), twice));
  CHECK(worst <= 1e-12);

  // Origin outside: rejected.
  ConvexPolygon off = unit_square();
  off.vertices.colwise() += Vector2(5.0, 0.0);
  CHECK_THROWS_AS(polar_polygon(off), ValidationError);
}

TEST_CASE("hat basis partition of unity and boundary integrals") {
  HatBasis hats(12);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> t(0.0, kTwoPi);
  for (int rep = 0; rep < 100; ++rep) {
    double theta = t(rng);
    double sum = 0;
    for (Index i = 0; i < 12; ++i) sum += hats(i, theta);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Sum of all hat integrals of f = 1 is the perimeter, to roundoff.
  ConvexPolygon reuleaux = support_polygon(sample_support(ShapeDescriptor::reuleaux(1.0), 60));
  BoundaryDensity ones = boundary_density(reuleaux, [](const Vector2&) { return 1.0; });
  Vector g = hat_boundary_integrals(reuleaux, ones);
  CHECK(g.sum() == doctest::Approx(polygon_perimeter(reuleaux)).epsilon(1e-12));
  CHECK(g.minCoeff() > 0);
  // Single-hat integral agrees with the batched version.
  CHECK(boundary_integral(reuleaux, ones, 7) == doctest::Approx(g[7]).epsilon(1e-13));
}

TEST_CASE("hat boundary integrals converge to the continuum form") {
  // For a smooth body, integral of f psi_i over the boundary approaches
  // integral of f(theta) psi_i(theta) rho(theta) dtheta; check O(h^2) decay
  // of the worst deviation on an ellipse with f = 1.
  auto worst_deviation = [](Index n) {
    Vector p(n);
    for (Index i = 0; i < n; ++i) {
      double theta = grid_step(n) * i;
      double c = std::cos(theta), s = std::sin(theta);
      p[i] = std::sqrt(1.5 * 1.5 * c * c + 0.7 * 0.7 * s * s);
    }
    ConvexPolygon E = support_polygon(p);
    BoundaryDensity ones = boundary_density(E, [](const Vector2&) { return 1.0; });
    Vector g = hat_boundary_integrals(E, ones);
    HatBasis hats(n);
    double worst = 0;
    for (Index i = 0; i < n; ++i) {
      // Dense quadrature of psi_i(theta) rho(theta) over the two cells.
      double acc = 0;
      const int steps = 400;
      double lo = grid_step(n) * (static_cast<double>(i) - 1);
      double dh = 2 * grid_step(n) / steps;
      for (int k = 0; k < steps; ++k) {
        double theta = lo + (k + 0.5) * dh;
        double pp = std::sqrt(1.5 * 1.5 * std::cos(theta) * std::cos(theta) +
                              0.7 * 0.7 * std::sin(theta) * std::sin(theta));
        double rho = 1.5 * 1.5 * 0.7 * 0.7 / (pp * pp * pp);
        acc += hats(i, theta) * rho * dh;
      }
      worst = std::max(worst, std::abs(g[i] - acc));
    }
    return worst;
  };
  double d30 = worst_deviation(30), d60 = worst_deviation(60);
  CHECK(d60 * 3.0 <= d30);  // roughly fourfold decay
}
