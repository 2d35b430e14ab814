#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "convopt/fem.hpp"
#include "convopt/geometry.hpp"
#include "convopt/oracle.hpp"
#include "convopt/shapes.hpp"
#include "convopt/support.hpp"
#include "convopt/types.hpp"

using namespace convopt;

namespace {

ConvexPolygon centered_square(double side) {
  double r = side / 2;
  Matrix2X v(2, 4);
  v << r, -r, -r, r, r, r, -r, -r;
  return make_polygon(v);
}

ConvexPolygon disk_polygon(double radius = 1.0, Index n = 256) {
  return support_polygon(Vector::Constant(n, radius));
}

// Edge-midpoint quadrature, exact for quadratics on each triangle.
double integral_of_square(const fem::Mesh& mesh, const fem::DiscreteField& u) {
  double acc = 0;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    Vector2 a = mesh.nodes.col(mesh.triangles(0, t));
    Vector2 b = mesh.nodes.col(mesh.triangles(1, t));
    Vector2 c = mesh.nodes.col(mesh.triangles(2, t));
    double area = 0.5 * cross2(b - a, c - a);
    double ua = u.values[mesh.triangles(0, t)];
    double ub = u.values[mesh.triangles(1, t)];
    double uc = u.values[mesh.triangles(2, t)];
    double mab = 0.5 * (ua + ub), mbc = 0.5 * (ub + uc), mca = 0.5 * (uc + ua);
    acc += area / 3 * (mab * mab + mbc * mbc + mca * mca);
  }
  return acc;
}

fem::DiscreteField fill_linear(const fem::Mesh& mesh, double a, double b, double c) {
  fem::DiscreteField u;
  u.values = Vector(mesh.node_count());
  for (Index i = 0; i < mesh.node_count(); ++i)
    u.values[i] = a + b * mesh.nodes(0, i) + c * mesh.nodes(1, i);
  return u;
}

}  // namespace

TEST_CASE("mesh respects the edge-size bound and reproduces the polygon area") {
  ConvexPolygon sq = centered_square(1.0);
  for (double target : {0.5, 0.2, 0.071}) {
    fem::Mesh mesh = fem::mesh_polygon(sq, target);
    CHECK(fem::max_edge_length(mesh) <= target * (1 + 1e-9));
    CHECK(std::abs(fem::mesh_area(mesh) - 1.0) <= 1e-12);
  }

  ConvexPolygon disk = disk_polygon(1.0, 48);
  fem::Mesh mesh = fem::mesh_polygon(disk, 0.3);
  double area = polygon_area(disk);
  for (int level = 0; level < 3; ++level) {
    CHECK(std::abs(fem::mesh_area(mesh) - area) <= 1e-12 * area);
    CHECK(mesh.level == level);
    mesh = fem::refine(mesh);
  }
}

TEST_CASE("boundary nodes carry exact polygon-edge provenance") {
  ConvexPolygon disk = disk_polygon(1.0, 32);
  fem::Mesh mesh = fem::refine(fem::mesh_polygon(disk, 0.4));
  CHECK(!mesh.boundary.empty());
  double covered = 0;
  for (const auto& e : mesh.boundary) {
    Vector2 lo = disk.vertex(e.polygon_edge);
    Vector2 hi = disk.vertex(mod_index(e.polygon_edge + 1, disk.size()));
    CHECK((mesh.nodes.col(e.a) - (lo + e.s_a * (hi - lo))).norm() <= 1e-12);
    double s_b = e.s_b == 0 ? 1.0 : e.s_b;
    CHECK((mesh.nodes.col(e.b) - (lo + s_b * (hi - lo))).norm() <= 1e-12);
    CHECK(mesh.on_boundary[e.a]);
    CHECK(mesh.on_boundary[e.b]);
    covered += (mesh.nodes.col(e.b) - mesh.nodes.col(e.a)).norm();
  }
  CHECK(covered == doctest::Approx(polygon_perimeter(disk)).epsilon(1e-12));
}

TEST_CASE("refinement quadruples the triangles and doubles the boundary edges") {
  fem::Mesh coarse = fem::mesh_polygon(centered_square(2.0), 0.8);
  fem::Mesh fine = fem::refine(coarse);
  CHECK(fine.triangle_count() == 4 * coarse.triangle_count());
  CHECK(fine.boundary.size() == 2 * coarse.boundary.size());
  CHECK(fine.level == coarse.level + 1);
  CHECK(std::abs(fem::mesh_area(fine) - fem::mesh_area(coarse)) <= 1e-12 * fem::mesh_area(coarse));
  CHECK(fem::max_edge_length(fine) == doctest::Approx(fem::max_edge_length(coarse) / 2));
}

TEST_CASE("degenerate polygons are rejected") {
  Matrix2X sliver(2, 4);
  sliver << 0, 1, 1, 0, 0, 0, 1e-12, 1e-12;
  ConvexPolygon P = make_polygon(sliver);
  CHECK_THROWS_AS((void)fem::mesh_polygon(P, 0.1), ValidationError);
}

TEST_CASE("poisson solve on the disk matches u = (1 - r^2)/4") {
  ConvexPolygon disk = disk_polygon();
  auto one = [](const Vector2&) { return 1.0; };
  fem::Mesh coarse = fem::mesh_polygon(disk, 0.2);
  fem::Mesh fine = fem::refine(coarse);
  // Node 0 is the fan center (the centroid, here the origin) on every level.
  double err_coarse = std::abs(fem::solve_poisson(coarse, one).values[0] - 0.25);
  double err_fine = std::abs(fem::solve_poisson(fine, one).values[0] - 0.25);
  CHECK(err_coarse <= 5e-3);
  CHECK(err_fine <= 0.5 * err_coarse);

  fem::DiscreteField zero = fem::solve_poisson(coarse, [](const Vector2&) { return 0.0; });
  CHECK(zero.values.norm() <= 1e-12);
}

TEST_CASE("field integral is exact for linear fields") {
  fem::Mesh mesh = fem::mesh_polygon(centered_square(1.0), 0.3);
  CHECK(fem::field_integral(mesh, fill_linear(mesh, 3.0, 2.0, -1.0)) ==
        doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("square eigenvalues converge at second order") {
  ConvexPolygon sq = centered_square(1.0);
  double exact1 = 2 * kPi * kPi, exact2 = 5 * kPi * kPi;

  fem::Mesh mesh = fem::mesh_polygon(sq, 0.25);
  std::vector<double> h, err;
  std::vector<double> last;
  for (int level = 0; level < 3; ++level) {
    auto pairs = fem::eigs(mesh, 4);
    CHECK(pairs.size() == 4);
    for (int i = 1; i < 4; ++i) CHECK(pairs[i].first >= pairs[i - 1].first);
    CHECK(pairs[0].first > 0);
    h.push_back(fem::max_edge_length(mesh));
    err.push_back(std::abs(pairs[0].first - exact1));
    last = {pairs[0].first, pairs[1].first, pairs[2].first, pairs[3].first};
    mesh = fem::refine(mesh);
  }
  CHECK(std::abs(last[0] - exact1) <= 2.5e-3 * exact1);
  CHECK(std::abs(last[1] - exact2) <= 8e-3 * exact2);
  // The symmetric fan mesh keeps the (2,1)/(1,2) pair numerically degenerate.
  CHECK(std::abs(last[1] - last[2]) <= 1e-6 * last[1]);
  CHECK(oracle::fit_loglog_slope(h, err) >= 1.9);
}

TEST_CASE("disk eigenvalue with extrapolation beats the fine level") {
  ConvexPolygon disk = disk_polygon();
  fem::Mesh m0 = fem::mesh_polygon(disk, 0.2);
  fem::Mesh m1 = fem::refine(m0);
  fem::Mesh m2 = fem::refine(m1);
  double l0 = fem::eigs(m0, 1)[0].first;
  double l1 = fem::eigs(m1, 1)[0].first;
  double l2 = fem::eigs(m2, 1)[0].first;

  double j01_sq = 5.78318596294678;
  CHECK(std::abs(fem::extrapolate(l0, l1) - j01_sq) <= 2e-3);

  // Self-convergence: the two-level extrapolation lands at least 3x closer to
  // the (finer) reference than the fine value it was built from.
  double reference = fem::extrapolate(l1, l2);
  CHECK(std::abs(fem::extrapolate(l0, l1) - reference) <= std::abs(l1 - reference) / 3);

  // Exact on data that is already quadratic in h, and neutral on constants.
  CHECK(fem::extrapolate(7.0 + 4e-2, 7.0 + 1e-2) == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(fem::extrapolate(3.5, 3.5) == doctest::Approx(3.5).epsilon(1e-14));
}

TEST_CASE("eigenvalues scale as 1/t^2 under dilation") {
  fem::Mesh unit = fem::mesh_polygon(centered_square(1.0), 0.2);
  fem::Mesh scaled = fem::mesh_polygon(centered_square(2.0), 0.4);
  // Homothetic meshes: the discrete spectra scale exactly.
  double l_unit = fem::eigs(unit, 1)[0].first;
  double l_scaled = fem::eigs(scaled, 1)[0].first;
  CHECK(4 * l_scaled == doctest::Approx(l_unit).epsilon(1e-7));
}

TEST_CASE("smaller disks have larger principal eigenvalues") {
  fem::Mesh big = fem::mesh_polygon(disk_polygon(1.0, 64), 0.15);
  fem::Mesh small = fem::mesh_polygon(disk_polygon(0.8, 64), 0.15);
  CHECK(fem::eigs(small, 1)[0].first > fem::eigs(big, 1)[0].first);
}

TEST_CASE("eigenfunctions are mass-normalized and the solve is deterministic") {
  fem::Mesh mesh = fem::refine(fem::mesh_polygon(disk_polygon(), 0.2));
  auto pairs = fem::eigs(mesh, 2, 7);
  CHECK(integral_of_square(mesh, pairs[0].second) == doctest::Approx(1.0).epsilon(1e-9));
  auto again = fem::eigs(mesh, 2, 7);
  CHECK(pairs[0].first == again[0].first);
  CHECK(pairs[1].first == again[1].first);
  CHECK((pairs[0].second.values - again[0].second.values).norm() == 0.0);
}

TEST_CASE("boundary density of a hand-filled linear field is exact") {
  ConvexPolygon sq = centered_square(1.0);
  fem::Mesh mesh = fem::mesh_polygon(sq, 0.3);
  fem::DiscreteField u = fill_linear(mesh, 0.0, 2.0, 1.0);
  BoundaryDensity density = fem::boundary_gradient_density(mesh, sq, u);
  CHECK(!density.points.empty());
  for (const auto& q : density.points) CHECK(q.value == doctest::Approx(5.0).epsilon(1e-12));

  // Adjoint form -(du/dn)(dq/dn) on the right edge (normal (1, 0)).
  fem::DiscreteField z = fill_linear(mesh, 0.0, 1.0, -3.0);
  BoundaryDensity mixed = fem::boundary_gradient_density(mesh, sq, u, &z);
  for (const auto& q : mixed.points) {
    if (std::abs(q.x.x() - 0.5) <= 1e-12) CHECK(q.value == doctest::Approx(-2.0).epsilon(1e-12));
  }
}

TEST_CASE("disk normal flux and eigen-density are radially constant") {
  ConvexPolygon disk = disk_polygon();
  fem::Mesh mesh = fem::refine(fem::refine(fem::mesh_polygon(disk, 0.2)));

  // -Laplace(u) = 1: du/dn = -1/2, so |grad u|^2 -> 1/4 on the boundary.
  fem::DiscreteField u = fem::solve_poisson(mesh, [](const Vector2&) { return 1.0; });
  BoundaryDensity flux = fem::boundary_gradient_density(mesh, disk, u);
  double mean = 0, total = 0;
  for (const auto& q : flux.points) {
    mean += q.weight * q.value;
    total += q.weight;
  }
  mean /= total;
  // The raw element fluxes carry the documented O(h) bias: ~3% at this size.
  CHECK(std::abs(mean - 0.25) <= 0.05 * 0.25);

  // First eigenfunction: the density is constant up to discretization error.
  fem::DiscreteField phi = fem::eigs(mesh, 1)[0].second;
  BoundaryDensity eig = fem::boundary_gradient_density(mesh, disk, phi);
  double lo = eig.points.front().value, hi = lo, acc = 0, w = 0;
  for (const auto& q : eig.points) {
    lo = std::min(lo, q.value);
    hi = std::max(hi, q.value);
    acc += q.weight * q.value;
    w += q.weight;
  }
  CHECK((hi - lo) <= 0.05 * (acc / w));
}
