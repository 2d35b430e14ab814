#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "convopt/fem.hpp"
#include "convopt/functionals.hpp"
#include "convopt/gauge.hpp"
#include "convopt/oracle.hpp"
#include "convopt/support.hpp"
#include "convopt/types.hpp"

// Finite-difference cross-checks of every optimizer-facing gradient.  Lives
// next to the functionals rather than in oracle.cpp so the closed-form
// identity oracles stay independent of the code they certify.
namespace convopt::oracle {

namespace {

using Eval = std::function<double(const Vector&, Vector*)>;

// Random feasible draws sit exactly on the convexity boundary; a constant
// shift adds itself to every curvature radius and moves them strictly inside,
// keeping both sides of each central difference feasible.
Vector interior_feasible(Index n, std::mt19937_64& rng) {
  Vector p = random_feasible_support(n, rng);
  return p + Vector::Constant(n, 0.2 * std::max(1.0, p.cwiseAbs().maxCoeff()));
}

// The gauge and polar-pair maps additionally need strictly positive samples.
Vector positive_feasible(Index n, std::mt19937_64& rng) {
  Vector p = interior_feasible(n, rng);
  double lift = 0.15 * std::max(1.0, p.cwiseAbs().maxCoeff()) - p.minCoeff();
  if (lift > 0) p += Vector::Constant(n, lift);
  return p;
}

// Central differences of a FEM functional are meaningful only while the whole
// stencil meshes with one topology: the subdivision counts are ceilings, and
// a point whose counts sit on an integer boundary sees a spurious jump.  The
// draws below are redrawn until every +/- step keeps the counts, and the
// eigenvalue draws additionally keep lambda_1..lambda_3 well separated so the
// values stay differentiable.
std::pair<Index, Index> mesh_signature(const Vector& x, Parametrization kind) {
  ConvexPolygon P = kind == Parametrization::kGauge ? gauge_polygon(x) : support_polygon(x);
  fem::Mesh mesh = fem::mesh_polygon(P, polygon_diameter(P) / 40);
  return {mesh.node_count(), mesh.triangle_count()};
}

bool stencil_is_mesh_stable(const Vector& x, Parametrization kind, double step) {
  auto base = mesh_signature(x, kind);
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double eps = step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + eps;
    if (mesh_signature(probe, kind) != base) return false;
    probe[i] = x[i] - eps;
    if (mesh_signature(probe, kind) != base) return false;
    probe[i] = x[i];
  }
  return true;
}

bool spectrum_is_separated(const Vector& x, Parametrization kind) {
  ConvexPolygon P = kind == Parametrization::kGauge ? gauge_polygon(x) : support_polygon(x);
  fem::Mesh mesh = fem::mesh_polygon(P, polygon_diameter(P) / 40);
  auto pairs = fem::eigs(mesh, 3);
  return (pairs[1].first - pairs[0].first) >= 2e-2 * pairs[0].first &&
         (pairs[2].first - pairs[1].first) >= 2e-2 * pairs[1].first;
}

Vector fem_point(Index n, std::mt19937_64& rng, Parametrization kind, double step) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vector x = kind == Parametrization::kGauge ? positive_feasible(n, rng)
                                               : interior_feasible(n, rng);
    if (stencil_is_mesh_stable(x, kind, step) && spectrum_is_separated(x, kind)) return x;
  }
  throw Error("no mesh-stable finite-difference point found");
}

CheckResult fd_case(const std::string& name, const Eval& f, const std::vector<Vector>& points,
                    double tolerance, double step) {
  CheckResult result;
  result.name = name;
  result.threshold = tolerance;
  double worst = 0;
  for (const auto& x : points) {
    Vector grad(x.size());
    f(x, &grad);
    Vector fd = fd_gradient([&f](const Vector& y) { return f(y, nullptr); }, x, step);
    worst = std::max(worst, (grad - fd).norm() / std::max(1.0, fd.norm()));
  }
  result.observed = worst;
  result.pass = worst <= tolerance;
  result.detail = std::to_string(points.size()) + " random feasible points, n = " +
                  std::to_string(points.empty() ? 0 : points.front().size()) + ", step " +
                  std::to_string(step);
  return result;
}

}  // namespace

SuiteReport gradient_suite(std::uint64_t seed) {
  SuiteReport report;
  report.suite = "gradients";
  std::mt19937_64 rng(seed);

  const double geometric_tol = 1e-6, geometric_step = 1e-6;
  const double fem_tol = 1e-2, fem_step = 1e-4;

  std::vector<Vector> geo, geo_positive, fem, fem_positive;
  for (int i = 0; i < 5; ++i) geo.push_back(interior_feasible(24, rng));
  for (int i = 0; i < 5; ++i) geo_positive.push_back(positive_feasible(24, rng));
  for (int i = 0; i < 5; ++i)
    fem.push_back(fem_point(12, rng, Parametrization::kSupport, fem_step));
  for (int i = 0; i < 5; ++i)
    fem_positive.push_back(fem_point(12, rng, Parametrization::kGauge, fem_step));

  report.cases.push_back(fd_case(
      "area/exact", [](const Vector& p, Vector* g) { return area_functional(p, g); }, geo,
      geometric_tol, geometric_step));
  report.cases.push_back(fd_case(
      "perimeter/canonical",
      [](const Vector& p, Vector* g) { return perimeter_functional(p, g); }, geo, geometric_tol,
      geometric_step));
  report.cases.push_back(fd_case(
      "area-perimeter-tradeoff",
      [](const Vector& p, Vector* g) { return area_perimeter_tradeoff(p, 0.7, g); }, geo,
      geometric_tol, geometric_step));
  report.cases.push_back(fd_case(
      "mahler", [](const Vector& p, Vector* g) { return mahler_functional(p, g); }, geo_positive,
      geometric_tol, geometric_step));

  // FEM-backed functionals: single-level meshes at the default element size
  // keep the suite fast; the extrapolated path gets its own spot check below.
  FemSettings single{0.0, 0, false};
  report.cases.push_back(fd_case(
      "eigenvalue/lambda1-support",
      [&](const Vector& p, Vector* g) {
        return eigenvalue_functional(p, 1, EigenvalueNormalization::kRaw, g,
                                     Parametrization::kSupport, single);
      },
      fem, fem_tol, fem_step));
  report.cases.push_back(fd_case(
      "eigenvalue/lambda2-times-area",
      [&](const Vector& p, Vector* g) {
        return eigenvalue_functional(p, 2, EigenvalueNormalization::kTimesArea, g,
                                     Parametrization::kSupport, single);
      },
      fem, fem_tol, fem_step));
  report.cases.push_back(fd_case(
      "eigenvalue/lambda1-gauge",
      [&](const Vector& p, Vector* g) {
        return eigenvalue_functional(p, 1, EigenvalueNormalization::kRaw, g,
                                     Parametrization::kGauge, single);
      },
      fem_positive, fem_tol, fem_step));
  report.cases.push_back(fd_case(
      "poisson-integral/unit",
      [&](const Vector& p, Vector* g) {
        return pde_integral_functional(p, PdeSource::kUnit, g, single);
      },
      fem, fem_tol, fem_step));
  report.cases.push_back(fd_case(
      "poisson-integral/bw1",
      [&](const Vector& p, Vector* g) {
        return pde_integral_functional(p, PdeSource::kBW1, g, single);
      },
      fem, fem_tol, fem_step));
  report.cases.push_back(fd_case(
      "poisson-integral/bw2",
      [&](const Vector& p, Vector* g) {
        return pde_integral_functional(p, PdeSource::kBW2, g, single);
      },
      fem, fem_tol, fem_step));

  FemSettings extrapolated{0.0, 1, true};
  report.cases.push_back(fd_case(
      "eigenvalue/lambda1-extrapolated",
      [&](const Vector& p, Vector* g) {
        return eigenvalue_functional(p, 1, EigenvalueNormalization::kRaw, g,
                                     Parametrization::kSupport, extrapolated);
      },
      {fem_point(10, rng, Parametrization::kSupport, fem_step)}, fem_tol, fem_step));

  // Sign convention: dilating the disk by t scales the eigenvalue by 1/t^2,
  // so the gradient must point inward with grad . p = -2 lambda.
  {
    CheckResult sign;
    sign.name = "eigenvalue/disk-dilation-sign";
    sign.threshold = fem_tol;
    Vector disk = Vector::Constant(64, 1.0);
    Vector grad(disk.size());
    double lambda = eigenvalue_functional(disk, 1, EigenvalueNormalization::kRaw, &grad,
                                          Parametrization::kSupport, single);
    sign.observed = std::abs(grad.dot(disk) + 2 * lambda) / (2 * lambda);
    sign.pass = sign.observed <= sign.threshold && grad.maxCoeff() < 0;
    sign.detail = "grad . p vs -2 lambda on the unit disk, all components negative";
    report.cases.push_back(sign);
  }

  return report;
}

}  // namespace convopt::oracle
