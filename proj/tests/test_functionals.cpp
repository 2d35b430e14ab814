#include <doctest.h>

#include <cmath>
#include <random>

#include "convopt/fem.hpp"
#include "convopt/functionals.hpp"
#include "convopt/gauge.hpp"
#include "convopt/geometry.hpp"
#include "convopt/oracle.hpp"
#include "convopt/shapes.hpp"
#include "convopt/support.hpp"
#include "convopt/types.hpp"

using namespace convopt;

namespace {

Vector smooth_body(Index n) {
  Vector p(n);
  for (Index j = 0; j < n; ++j) {
    double t = kTwoPi * double(j) / double(n);
    p[j] = 1.0 + 0.1 * std::cos(3 * t) + 0.05 * std::sin(t);
  }
  return p;
}

double fd_relative_error(const std::function<double(const Vector&, Vector*)>& f,
                         const Vector& x) {
  Vector grad(x.size());
  f(x, &grad);
  Vector fd = oracle::fd_gradient([&](const Vector& y) { return f(y, nullptr); }, x, 1e-6);
  return (grad - fd).norm() / std::max(1.0, fd.norm());
}

// Random feasible draws sit exactly on the convexity boundary; shift them
// inward (a constant adds itself to every curvature radius) so central
// differences stay feasible on both sides.
Vector interior_feasible(Index n, std::mt19937_64& rng) {
  Vector p = oracle::random_feasible_support(n, rng);
  return p + Vector::Constant(n, 0.2 * std::max(1.0, p.cwiseAbs().maxCoeff()));
}

}  // namespace

TEST_CASE("vertex jacobians satisfy pullback/push duality") {
  Index n = 20;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  Matrix2X G(2, n);
  Vector dp(n);
  for (Index j = 0; j < n; ++j) {
    G(0, j) = gauss(rng);
    G(1, j) = gauss(rng);
    dp[j] = gauss(rng);
  }

  VertexJacobian support = support_vertex_jacobian(n);
  double lhs = (G.array() * support.push(dp).array()).sum();
  CHECK(lhs == doctest::Approx(support.pullback(G).dot(dp)).epsilon(1e-12));

  Vector gamma = smooth_body(n);
  VertexJacobian gauge = gauge_vertex_jacobian(gamma);
  double lhs_g = (G.array() * gauge.push(dp).array()).sum();
  CHECK(lhs_g == doctest::Approx(gauge.pullback(G).dot(dp)).epsilon(1e-12));
}

TEST_CASE("area functional value, Euler identity, and finite differences") {
  Vector p = Vector::Constant(360, 1.0);
  Vector grad(p.size());
  double value = area_functional(p, &grad);
  CHECK(value == doctest::Approx(polygon_area(support_polygon(p))).epsilon(1e-13));
  // Area is quadratic in p, so grad . p = 2 A exactly.
  CHECK(grad.dot(p) == doctest::Approx(2 * value).epsilon(1e-12));

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Vector q = interior_feasible(24, rng);
    double err = fd_relative_error(
        [](const Vector& y, Vector* g) { return area_functional(y, g); }, q);
    CHECK(err <= 1e-8);
  }
}

TEST_CASE("area gradient modes agree up to their advertised orders") {
  auto deviation = [](Index n, GradientMode mode) {
    Vector p = smooth_body(n);
    Vector exact(n), other(n);
    area_functional(p, &exact, GradientMode::kExact);
    area_functional(p, &other, mode);
    return (exact - other).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff();
  };
  // Hat-transported boundary density: first-order consistent.
  double dev16 = deviation(16, GradientMode::kBoundaryDensity);
  double dev64 = deviation(64, GradientMode::kBoundaryDensity);
  CHECK(dev64 <= 0.5 * dev16);
  // Curvature-radius shortcut g = rho h: second-order consistent.
  CHECK(deviation(64, GradientMode::kCurvatureRadii) <= 5e-2);
  CHECK(deviation(128, GradientMode::kCurvatureRadii) <=
        0.5 * deviation(64, GradientMode::kCurvatureRadii));
}

TEST_CASE("perimeter functional and the quadrature variant") {
  Vector reuleaux = sample_support(ShapeDescriptor::reuleaux(1.0), 240);
  CHECK(std::abs(perimeter_functional(reuleaux) - kPi) <= 2e-3);

  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    Vector q = interior_feasible(24, rng);
    double err = fd_relative_error(
        [](const Vector& y, Vector* g) { return perimeter_functional(y, g); }, q);
    CHECK(err <= 1e-8);
  }

  // Quadrature variant: constant gradient 2 pi / n regardless of the body.
  Index n = 128;
  Vector disk = Vector::Constant(n, 1.0);
  Vector grad(n);
  double quad = perimeter_functional(disk, &grad, PerimeterVariant::kQuadrature);
  CHECK((grad.array() - kTwoPi / double(n)).abs().maxCoeff() <= 1e-15);
  // No segments on the disk: the value is the plain Riemann sum h * sum(p).
  CHECK(quad == doctest::Approx(kTwoPi).epsilon(1e-12));
  CHECK(std::abs(quad - perimeter_functional(disk)) <= 1e-3);

  // The square has four boundary segments of length `side`; the detector adds
  // their total length on top of the Riemann sum.  Each segment shows up as
  // two half-jumps of the central difference, so the grid must be fine enough
  // for side/2 to clear the 10h default threshold.
  Index m = 256;
  Vector square = sample_support(ShapeDescriptor::square(1.0), m);
  double with_segments = perimeter_functional(square, nullptr, PerimeterVariant::kQuadrature);
  double riemann = kTwoPi / double(m) * square.sum();
  CHECK(with_segments - riemann == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("area-perimeter tradeoff combines the canonical pieces") {
  Vector p = smooth_body(48);
  double mu = 0.7;
  CHECK(area_perimeter_tradeoff(p, mu) ==
        doctest::Approx(mu * area_functional(p) - perimeter_functional(p)).epsilon(1e-12));
  CHECK_THROWS_AS((void)area_perimeter_tradeoff(p, 0.0), ValidationError);

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    Vector q = interior_feasible(24, rng);
    double err = fd_relative_error(
        [mu](const Vector& y, Vector* g) { return area_perimeter_tradeoff(y, mu, g); }, q);
    CHECK(err <= 1e-8);
  }
}

TEST_CASE("mahler volume product: disk limit, scale invariance, gradients") {
  Vector disk = Vector::Constant(128, 1.0);
  CHECK(std::abs(mahler_functional(disk) - kPi * kPi) <= 0.01 * kPi * kPi);

  Vector p = smooth_body(64);
  CHECK(mahler_functional(1.7 * p) == doctest::Approx(mahler_functional(p)).epsilon(1e-10));

  double err = fd_relative_error(
      [](const Vector& y, Vector* g) { return mahler_functional(y, g); }, p);
  CHECK(err <= 1e-6);

  Vector bad = p;
  bad[3] = -0.2;
  CHECK_THROWS_AS((void)mahler_functional(bad), ValidationError);
}

TEST_CASE("eigenvalue functional reproduces the disk and its exact scalings") {
  Vector disk = Vector::Constant(256, 1.0);
  double lambda = eigenvalue_functional(disk, 1, EigenvalueNormalization::kRaw);
  CHECK(std::abs(lambda - 5.78318596294678) <= 2e-3);

  // Homothety: identical mesh topology, exactly scaled nodes.
  Vector small = Vector::Constant(64, 1.0);
  double l1 = eigenvalue_functional(small, 1, EigenvalueNormalization::kRaw);
  double l2 = eigenvalue_functional(2 * small, 1, EigenvalueNormalization::kRaw);
  CHECK(4 * l2 == doctest::Approx(l1).epsilon(1e-8));

  // lambda * area equals the product of the raw pieces.
  double product = eigenvalue_functional(small, 1, EigenvalueNormalization::kTimesArea);
  CHECK(product == doctest::Approx(l1 * area_functional(small)).epsilon(1e-12));

  CHECK(eigenvalue_functional(small, 2, EigenvalueNormalization::kRaw) > l1);
  CHECK_THROWS_AS(
      (void)eigenvalue_functional(small, 0, EigenvalueNormalization::kRaw), ValidationError);

  // Same body through the gauge map (radial vertices coincide for the disk).
  double via_gauge = eigenvalue_functional(Vector::Constant(256, 1.0), 1,
                                           EigenvalueNormalization::kRaw, nullptr,
                                           Parametrization::kGauge);
  CHECK(via_gauge == doctest::Approx(lambda).epsilon(1e-12));
}

TEST_CASE("eigenvalue gradients match finite differences and the dilation law") {
  FemSettings quick{0.15, 1, true};
  Vector p = smooth_body(12);
  double err = fd_relative_error(
      [&](const Vector& y, Vector* g) {
        return eigenvalue_functional(y, 1, EigenvalueNormalization::kRaw, g,
                                     Parametrization::kSupport, quick);
      },
      p);
  CHECK(err <= 1e-2);

  double err_gauge = fd_relative_error(
      [&](const Vector& y, Vector* g) {
        return eigenvalue_functional(y, 1, EigenvalueNormalization::kRaw, g,
                                     Parametrization::kGauge, quick);
      },
      p);
  CHECK(err_gauge <= 1e-2);

  double err_area = fd_relative_error(
      [&](const Vector& y, Vector* g) {
        return eigenvalue_functional(y, 1, EigenvalueNormalization::kTimesArea, g,
                                     Parametrization::kSupport, quick);
      },
      p);
  CHECK(err_area <= 1e-2);

  // Dilation: lambda(t K) = lambda / t^2, so grad . p = -2 lambda; growing
  // the domain must lower the eigenvalue.
  Vector disk = Vector::Constant(64, 1.0);
  Vector grad(disk.size());
  double lambda = eigenvalue_functional(disk, 1, EigenvalueNormalization::kRaw, &grad,
                                        Parametrization::kSupport, FemSettings{0.1, 0, false});
  CHECK(grad.dot(disk) == doctest::Approx(-2 * lambda).epsilon(1e-2));
  CHECK(grad.maxCoeff() < 0);
}

TEST_CASE("maximizing wrapper negates value and gradient") {
  FemSettings quick{0.2, 0, false};
  Functional f_min = make_eigenvalue_functional(32, 1, EigenvalueNormalization::kRaw,
                                                Parametrization::kSupport, quick, false);
  Functional f_max = make_eigenvalue_functional(32, 1, EigenvalueNormalization::kRaw,
                                                Parametrization::kSupport, quick, true);
  CHECK(f_min.sign == 1.0);
  CHECK(f_max.sign == -1.0);
  Vector p = smooth_body(32);
  Vector g_min(32), g_max(32);
  double v_min = f_min.value_and_gradient(p, g_min);
  double v_max = f_max.value_and_gradient(p, g_max);
  CHECK(v_max == doctest::Approx(-v_min).epsilon(1e-13));
  CHECK((g_min + g_max).norm() <= 1e-13 * g_min.norm());
}

TEST_CASE("poisson integral functional: disk value, sources, gradients") {
  // J = int (1 - r^2)/4 = pi/8 on the unit disk.
  Vector disk = Vector::Constant(256, 1.0);
  double j_unit = pde_integral_functional(disk, PdeSource::kUnit);
  CHECK(std::abs(j_unit - kPi / 8) <= 1e-3 * kPi / 8);

  // Analytic source gradients agree with finite differences.
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coord(-0.9, 0.9);
  for (PdeSource source : {PdeSource::kBW1, PdeSource::kBW2}) {
    for (int trial = 0; trial < 4; ++trial) {
      Vector x(2);
      x << coord(rng), coord(rng);
      Vector fd = oracle::fd_gradient(
          [&](const Vector& y) { return pde_source_value(source, Vector2(y[0], y[1])); }, x);
      Vector2 analytic = pde_source_gradient(source, Vector2(x[0], x[1]));
      CHECK((Vector2(fd[0], fd[1]) - analytic).norm() <= 1e-6 * std::max(1.0, analytic.norm()));
    }
  }
  CHECK(pde_source_gradient(PdeSource::kUnit, {0.3, -0.4}).norm() == 0.0);

  FemSettings quick{0.15, 1, true};
  for (PdeSource source : {PdeSource::kUnit, PdeSource::kBW1}) {
    double err = fd_relative_error(
        [&](const Vector& y, Vector* g) {
          return pde_integral_functional(y, source, g, quick);
        },
        smooth_body(12));
    CHECK(err <= 1e-2);
  }

  // Self-convergence of the nonsmooth-source value on the disk.
  Vector body = Vector::Constant(128, 1.0);
  double coarse = pde_integral_functional(body, PdeSource::kBW1, nullptr, FemSettings{0.05, 1, true});
  double fine = pde_integral_functional(body, PdeSource::kBW1, nullptr, FemSettings{0.025, 1, true});
  CHECK(std::abs(coarse - fine) <= 2e-4);

  Functional named = make_pde_integral_functional(128, PdeSource::kBW2);
  CHECK(named.name == "poisson_integral_bw2");
  CHECK(named.dim == 128);
}
