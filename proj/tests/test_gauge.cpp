#include <doctest.h>

#include <cmath>
#include <random>

#include "convopt/gauge.hpp"
#include "convopt/geometry.hpp"
#include "convopt/oracle.hpp"
#include "convopt/shapes.hpp"

using namespace convopt;

TEST_CASE("gauge polygon vertices sit at r_i / gamma_i") {
  Index n = 12;
  GaugeVector g = Vector::Constant(n, 0.5);  // disk of radius 2
  ConvexPolygon P = gauge_polygon(g);
  REQUIRE(P.size() == n);
  CHECK(P.grid == AngleGrid::kRadial);
  for (Index i = 0; i < n; ++i) {
    CHECK(P.vertex(i).norm() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(P.grid_angles[i] == doctest::Approx(grid_step(n) * i));
  }
  CHECK(is_convex(P, 1e-12));

  GaugeVector bad = g;
  bad[3] = 0.0;
  bad[7] = -1.0;
  try {
    gauge_polygon(bad);
    FAIL("expected InfeasibleParameters");
  } catch (const InfeasibleParameters& e) {
    REQUIRE(e.indices.size() == 2);
    CHECK(e.indices[0] == 3);
    CHECK(e.indices[1] == 7);
  }
}

TEST_CASE("sampled square gauge reproduces the square") {
  Index n = 16;
  GaugeVector g = sample_gauge(ShapeDescriptor::square(2.0), n);
  // gamma(theta) = max(|cos|, |sin|) for the side-2 square.
  for (Index i = 0; i < n; ++i) {
    double theta = grid_step(n) * i;
    CHECK(g[i] == doctest::Approx(std::max(std::abs(std::cos(theta)),
                                           std::abs(std::sin(theta)))));
  }
  ConvexPolygon P = gauge_polygon(g);
  CHECK(is_convex(P, 1e-12));
  CHECK(polygon_area(P) <= 4.0 + 1e-12);
}

TEST_CASE("gauge convexity rows match the radial area identity") {
  // On a feasible triple the signed triangle area of consecutive vertices is
  // (g1 + g3 - 2 g2 cos h) sin h / (2 g1 g2 g3): positive iff the row is.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.2, 3.0);
  Index n = 10;
  double h = grid_step(n);
  for (int rep = 0; rep < 50; ++rep) {
    double g1 = unif(rng), g2 = unif(rng), g3 = unif(rng);
    oracle::IdentitySample s = oracle::gauge_area_identity(g1, g2, g3, 0.3, h);
    CHECK(std::abs(s.residual()) <= 1e-13 * std::max(1.0, std::abs(s.exact)));
  }
  LinearConstraintSet rows = gauge_convexity_constraints(n);
  CHECK(rows.ineq_tags.size() == static_cast<std::size_t>(n));
  GaugeVector g = sample_gauge(ShapeDescriptor::disk(1.0, {0.2, -0.1}), n);
  CHECK(rows.max_violation(g) <= 1e-12);
}

TEST_CASE("polar pair multiplies to the Mahler regime") {
  // One parameter vector, two bodies: support_polygon(p) and gauge_polygon(p)
  // are mutual polars up to discretization. For the disk the volume product
  // of the pair tends to pi^2 from below.
  Index n = 64;
  Vector p = Vector::Constant(n, 1.3);
  auto [body, dual] = polar_pair(p);
  CHECK(body.grid == AngleGrid::kNormal);
  CHECK(dual.grid == AngleGrid::kRadial);
  double product = polygon_area(body) * polygon_area(dual);
  CHECK(product <= kPi * kPi + 1e-9);
  CHECK(product >= kPi * kPi * 0.99);

  // The gauge polygon is (a refinement of) the polar of the support polygon:
  // every gauge vertex lies on the polar body's boundary.
  ConvexPolygon polar = polar_polygon(body);
  for (Index i = 0; i < n; ++i)
    CHECK(distance_to_polygon(dual.vertex(i), polar) <= 1e-12);
}

TEST_CASE("gauge hat gradient matches finite differences of area") {
  Index n = 24;
  GaugeVector g = sample_gauge(ShapeDescriptor::disk(1.0, {0.15, 0.1}), n);
  auto area_of = [](const Vector& x) { return polygon_area(gauge_polygon(x)); };

  // Shape derivative of area has boundary density 1.
  ConvexPolygon P = gauge_polygon(g);
  BoundaryDensity ones = boundary_density(P, [](const Vector2&) { return 1.0; });
  Vector grad = gauge_hat_gradient(P, g, ones);
  Vector fd = oracle::fd_gradient(area_of, g);
  CHECK((grad - fd).norm() <= 1e-5 * fd.norm());
}

TEST_CASE("gauge gradient scaling follows -1/gamma^2 homogeneity") {
  // Scaling gamma by c scales each vertex by 1/c, boundary lengths by 1/c,
  // and the -1/gamma^2 factor by 1/c^2: the area gradient scales by 1/c^3.
  Index n = 18;
  GaugeVector g = sample_gauge(ShapeDescriptor::square(1.5), n);
  double c = 1.7;
  auto grad_area = [](const GaugeVector& x) {
    ConvexPolygon P = gauge_polygon(x);
    BoundaryDensity ones = boundary_density(P, [](const Vector2&) { return 1.0; });
    return gauge_hat_gradient(P, x, ones);
  };
  Vector base = grad_area(g);
  Vector scaled = grad_area((c * g).eval());
  CHECK((scaled - base / (c * c * c)).norm() <= 1e-12 * base.norm());
}

TEST_CASE("gauge inclusion rows bound the body by sampled shapes") {
  Index n = 20;
  // K inside the unit disk: gamma_i >= 1 as lower bounds on the variable.
  LinearConstraintSet outer = gauge_inclusion_constraints(ShapeDescriptor::disk(1.0), n);
  CHECK(outer.ineq_tags.size() == static_cast<std::size_t>(n));
  GaugeVector inside = Vector::Constant(n, 1.25);  // disk of radius 0.8
  GaugeVector outside = Vector::Constant(n, 0.8);  // disk of radius 1.25
  CHECK(outer.max_violation(inside) <= 1e-14);
  RowTag worst;
  CHECK(outer.max_violation(outside, &worst) == doctest::Approx(0.2));
  CHECK(worst.family == ConstraintFamily::kInclusionUpper);

  // K containing the half-unit disk: gamma_i <= 2.
  LinearConstraintSet inner = gauge_inclusion_lower_constraints(ShapeDescriptor::disk(0.5), n);
  CHECK(inner.max_violation(inside) <= 1e-14);
  GaugeVector tiny = Vector::Constant(n, 2.5);
  CHECK(inner.max_violation(tiny) == doctest::Approx(0.5));
}
