#include <doctest.h>

#include <cmath>
#include <random>

#include "convopt/geometry.hpp"
#include "convopt/oracle.hpp"
#include "convopt/shapes.hpp"
#include "convopt/support.hpp"

using namespace convopt;

namespace {

// Ellipse with semi-axes (a, b): support, its derivative, and curvature radius.
double ellipse_support(double a, double b, double theta) {
  double c = std::cos(theta), s = std::sin(theta);
  return std::sqrt(a * a * c * c + b * b * s * s);
}
double ellipse_support_derivative(double a, double b, double theta) {
  double c = std::cos(theta), s = std::sin(theta);
  return (b * b - a * a) * s * c / ellipse_support(a, b, theta);
}
double ellipse_curvature_radius(double a, double b, double theta) {
  double p = ellipse_support(a, b, theta);
  return a * a * b * b / (p * p * p);
}

Vector sample_ellipse(double a, double b, Index n) {
  Vector p(n);
  for (Index i = 0; i < n; ++i) p[i] = ellipse_support(a, b, grid_step(n) * i);
  return p;
}

}  // namespace

TEST_CASE("sampling analytic bodies") {
  Vector disk = sample_support(ShapeDescriptor::disk(1.0), 8);
  CHECK(disk.isApproxToConstant(1.0, 1e-15));

  // Shifted disk: p(theta) = R + cx cos + cy sin.
  Vector shifted = sample_support(ShapeDescriptor::disk(2.0, {0.3, -0.4}), 16);
  for (Index i = 0; i < 16; ++i) {
    double theta = grid_step(16) * i;
    CHECK(shifted[i] ==
          doctest::Approx(2.0 + 0.3 * std::cos(theta) - 0.4 * std::sin(theta)).epsilon(1e-14));
  }

  // A Reuleaux triangle has constant width: antipodal sums are exact.
  Vector reuleaux = sample_support(ShapeDescriptor::reuleaux(1.0), 240);
  Vector widths = pair_widths(reuleaux);
  CHECK((widths.array() - 1.0).abs().maxCoeff() <= 1e-12);
  // Sampled support values of a convex body satisfy the rigorous rows.
  CHECK(curvature_radii(reuleaux).minCoeff() >= -feasibility_tolerance(reuleaux));

  auto make_bad = [] {
    Matrix2X bad(2, 4);
    bad << 1, -1, 1, -1, 1, 1, -1, -1;  // self-intersecting order
    return ShapeDescriptor::polygon(bad);
  };
  CHECK_THROWS_AS(make_bad(), ValidationError);
}

TEST_CASE("curvature radii: exactness and second-order convergence") {
  // First harmonics have constant radii equal to the constant term.
  Index n = 24;
  Vector p(n);
  for (Index i = 0; i < n; ++i) {
    double theta = grid_step(n) * i;
    p[i] = 2.5 + 0.4 * std::cos(theta) - 0.7 * std::sin(theta);
  }
  CHECK((curvature_radii(p).array() - 2.5).abs().maxCoeff() <= 1e-12);

  // Tangential coefficients recover the derivative of first harmonics.
  Vector q = tangential_coeffs(p);
  for (Index i = 0; i < n; ++i) {
    double theta = grid_step(n) * i;
    CHECK(q[i] == doctest::Approx(-0.4 * std::sin(theta) - 0.7 * std::cos(theta))
                      .epsilon(1e-12));
  }

  // Ellipse: O(h^2) against the analytic curvature radius a^2 b^2 / p^3.
  auto radii_err = [](Index m) {
    Vector rho = curvature_radii(sample_ellipse(1.5, 0.7, m));
    double worst = 0;
    for (Index i = 0; i < m; ++i)
      worst = std::max(worst,
                       std::abs(rho[i] - ellipse_curvature_radius(1.5, 0.7, grid_step(m) * i)));
    return worst;
  };
  double e40 = radii_err(40), e80 = radii_err(80);
  CHECK(e80 * 3.5 <= e40);  // ratio ~4 for a second-order scheme
  CHECK(e40 <= 4.6 * e80);

  auto coeff_err = [](Index m) {
    Vector q2 = tangential_coeffs(sample_ellipse(1.5, 0.7, m));
    double worst = 0;
    for (Index i = 0; i < m; ++i)
      worst = std::max(worst, std::abs(q2[i] - ellipse_support_derivative(1.5, 0.7,
                                                                          grid_step(m) * i)));
    return worst;
  };
  CHECK(coeff_err(80) * 3.5 <= coeff_err(40));
}

TEST_CASE("vertices: regular bodies, exact translations, infeasibility reporting") {
  // p constant 1 at n = 6: the regular hexagon inscribed in the unit circle.
  ConvexPolygon hexagon = support_polygon(Vector::Constant(6, 1.0));
  for (Index i = 0; i < 6; ++i)
    CHECK((hexagon.vertex(i) - radial(grid_step(6) * i)).norm() <= 1e-15);

  // Adding a first harmonic translates every vertex exactly.
  Vector p(6);
  for (Index i = 0; i < 6; ++i) {
    double theta = grid_step(6) * i;
    p[i] = 1.0 + 0.2 * std::cos(theta) + 0.1 * std::sin(theta);
  }
  ConvexPolygon shifted = support_polygon(p);
  for (Index i = 0; i < 6; ++i)
    CHECK((shifted.vertex(i) - (hexagon.vertex(i) + Vector2(0.2, 0.1))).norm() <= 1e-14);

  // Perturb one sample of the n = 5 disk until a row flips sign: the error
  // names the violating index.  The boundary delta solves rho_4(delta) = 0.
  Index n = 5;
  double h = grid_step(n);
  double boundary = (2 - 2 * std::cos(h)) / (2 * std::cos(h));
  Vector bad = Vector::Constant(n, 1.0);
  bad[4] = 1.0 + 1.01 * boundary;
  try {
    support_polygon(bad);
    FAIL("expected InfeasibleParameters");
  } catch (const InfeasibleParameters& e) {
    REQUIRE(e.indices.size() == 1);
    CHECK(e.indices[0] == 4);
  }
  // Just inside the boundary the construction succeeds.
  bad[4] = 1.0 + 0.99 * boundary;
  CHECK_NOTHROW(support_polygon(bad));
}

TEST_CASE("convexity constraint rows") {
  auto set = convexity_constraints(8);
  REQUIRE(set.num_ineq() == 8);
  Vector ones = Vector::Constant(8, 1.0);
  Vector rows = set.ineq_matrix() * ones;
  // p constant 1: every row evaluates to 2 - 2 cos(pi/4).
  CHECK((rows.array() - 0.5857864376269049).abs().maxCoeff() <= 1e-14);

  // The rigorous rows are positive multiples of the curvature radii.
  std::mt19937_64 rng(3);
  SupportVector p = oracle::random_feasible_support(16, rng);
  Vector r16 = convexity_constraints(16).ineq_matrix() * p;
  Vector rho = curvature_radii(p);
  double factor = 2 - 2 * std::cos(grid_step(16));
  CHECK((r16 - factor * rho).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("fd and fe rows exist for comparison and are not rigorous") {
  SupportVector p = oracle::fd_convexity_counterexample();
  const Index n = p.size();
  Vector fd_rows = convexity_constraints(n, ConvexityMode::kFiniteDifference).ineq_matrix() * p;
  CHECK(fd_rows.minCoeff() >= 0);
  CHECK_FALSE(is_convex(support_polygon_fd(p), 0.0));

  Vector ones = Vector::Constant(12, 2.0);
  Vector fe_rows = convexity_constraints(12, ConvexityMode::kFiniteElement).ineq_matrix() * ones;
  CHECK((fe_rows.array() - 2.0).abs().maxCoeff() <= 1e-12);  // constant p: rows equal p
}

TEST_CASE("width, symmetry and inclusion constraint families") {
  // Constant width: equality rows only.
  auto cw = constant_width_constraints(8, 1.0);
  CHECK(cw.num_eq() == 4);
  CHECK(cw.num_ineq() == 0);
  Vector disk = Vector::Constant(8, 0.5);
  CHECK(cw.max_violation(disk) <= 1e-15);

  // Diameter: pair 0 pinned, upper bounds elsewhere.
  auto diam = diameter_constraints(8, 1.0);
  CHECK(diam.num_eq() == 1);
  CHECK(diam.num_ineq() == 3);

  // Two-sided width bounds produce paired inequality rows.
  auto wc = width_constraints(8, 0.9, 1.1);
  CHECK(wc.num_ineq() == 8);
  CHECK(wc.num_eq() == 0);
  CHECK(wc.max_violation(disk) <= 1e-15);
  RowTag tag;
  Vector narrow = Vector::Constant(8, 0.4);
  CHECK(wc.max_violation(narrow, &tag) == doctest::Approx(0.1));
  CHECK(tag.family == ConstraintFamily::kWidthLower);

  CHECK_THROWS_AS(width_constraints(8, 2.0, 1.0), ValidationError);

  auto sym = symmetry_constraints(8);
  CHECK(sym.num_eq() == 4);
  Vector asym = disk;
  asym[1] += 0.25;
  CHECK(sym.max_violation(asym, &tag) == doctest::Approx(0.25));
  CHECK(tag.family == ConstraintFamily::kSymmetry);
  CHECK(tag.index == 1);

  // Inclusion in the unit disk: p_i <= 1; containment of the half disk: p_i >= 0.5.
  auto outer = inclusion_constraints(Vector::Constant(8, 1.0));
  auto inner = inclusion_lower_constraints(Vector::Constant(8, 0.5));
  CHECK(outer.num_ineq() == 8);
  CHECK(inner.num_ineq() == 8);
  CHECK(outer.max_violation(disk) <= 1e-15);
  CHECK(inner.max_violation(disk) <= 1e-15);

  // Square outer body, edge-normal variant: only the four axis rows remain.
  auto edges = inclusion_constraints_edges(ShapeDescriptor::square(2.0), 8);
  CHECK(edges.num_ineq() == 4);
  for (const auto& t : edges.ineq_tags) CHECK(t.index % 2 == 0);
  Vector square_p = sample_support(ShapeDescriptor::square(2.0), 8);
  CHECK(edges.max_violation(square_p) <= 1e-15);
}

TEST_CASE("sampled convex bodies are feasible (reverse direction)") {
  for (Index n : {6, 16, 64, 240}) {
    for (auto shape : {ShapeDescriptor::disk(1.3, {0.2, 0.1}), ShapeDescriptor::square(2.0),
                       ShapeDescriptor::reuleaux(1.0)}) {
      Vector p = sample_support(shape, n);
      CHECK(curvature_radii(p).minCoeff() >= -feasibility_tolerance(p));
      CHECK_NOTHROW(support_polygon(p));
    }
  }
}
