#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "convopt/fem.hpp"
#include "convopt/functionals.hpp"

namespace convopt {
namespace {

// Coarsest element size; refinement levels for extrapolation come on top.
double element_size(const ConvexPolygon& P, const FemSettings& fem) {
  return fem.target_h > 0 ? fem.target_h : polygon_diameter(P) / 40.0;
}

std::vector<fem::Mesh> mesh_levels(const ConvexPolygon& P, const FemSettings& fem) {
  std::vector<fem::Mesh> out;
  out.push_back(fem::mesh_polygon(P, element_size(P, fem)));
  for (int l = 0; l < std::max(0, fem.extra_levels); ++l)
    out.push_back(fem::refine(out.back()));
  return out;
}

ConvexPolygon build_polygon(const Vector& params, Parametrization kind) {
  return kind == Parametrization::kSupport ? support_polygon(params) : gauge_polygon(params);
}

VertexJacobian build_jacobian(const Vector& params, Parametrization kind) {
  return kind == Parametrization::kSupport ? support_vertex_jacobian(params.size())
                                           : gauge_vertex_jacobian(params);
}

}  // namespace

double eigenvalue_functional(const Vector& params, int k, EigenvalueNormalization normalization,
                             Vector* grad, Parametrization kind, const FemSettings& fem) {
  if (k < 1) throw ValidationError("eigenvalue index must be at least 1");
  ConvexPolygon P = build_polygon(params, kind);
  std::vector<fem::Mesh> meshes = mesh_levels(P, fem);
  const bool combine = fem.extrapolate && meshes.size() >= 2;

  // The gradient extrapolates the per-level exact sensitivities with the same
  // weights as the value, so it differentiates exactly what is returned.
  auto fine = fem::eigs(meshes.back(), k);
  double lambda = fine.back().first;
  Matrix2X vertex_grad;
  if (grad)
    vertex_grad = fem::eigenvalue_vertex_gradient(meshes.back(), P, lambda, fine.back().second);
  if (combine) {
    auto coarse = fem::eigs(meshes[meshes.size() - 2], k);
    lambda = fem::extrapolate(coarse.back().first, lambda);
    if (grad) {
      Matrix2X below = fem::eigenvalue_vertex_gradient(
          meshes[meshes.size() - 2], P, coarse.back().first, coarse.back().second);
      vertex_grad = (4.0 * vertex_grad - below) / 3.0;
    }
  }

  const double area = polygon_area(P);
  if (grad) {
    if (normalization == EigenvalueNormalization::kTimesArea)
      vertex_grad = area * vertex_grad + lambda * area_vertex_gradient(P);
    *grad = build_jacobian(params, kind).pullback(vertex_grad);
  }
  return normalization == EigenvalueNormalization::kTimesArea ? lambda * area : lambda;
}

double pde_integral_functional(const SupportVector& p, PdeSource source, Vector* grad,
                               const FemSettings& fem) {
  ConvexPolygon P = support_polygon(p);
  std::vector<fem::Mesh> meshes = mesh_levels(P, fem);
  const bool combine = fem.extrapolate && meshes.size() >= 2;
  auto f = [source](const Vector2& x) { return pde_source_value(source, x); };
  auto df = [source](const Vector2& x) { return pde_source_gradient(source, x); };
  auto unit = [](const Vector2&) { return 1.0; };

  // z solves -Laplace(z) = 1: the negated adjoint of J = int u (the adjoint
  // state -Laplace(q) = -1 gives the density -(du/dn)(dq/dn); the exact
  // discrete derivative below carries the same information).
  const fem::Mesh& finest = meshes.back();
  fem::DiscreteField u = fem::solve_poisson(finest, f);
  double value = fem::field_integral(finest, u);
  Matrix2X vertex_grad;
  if (grad) {
    fem::DiscreteField z = fem::solve_poisson(finest, unit);
    vertex_grad = fem::poisson_integral_vertex_gradient(finest, P, u, z, f, df);
  }
  if (combine) {
    const fem::Mesh& coarse = meshes[meshes.size() - 2];
    fem::DiscreteField uc = fem::solve_poisson(coarse, f);
    value = fem::extrapolate(fem::field_integral(coarse, uc), value);
    if (grad) {
      fem::DiscreteField zc = fem::solve_poisson(coarse, unit);
      Matrix2X below = fem::poisson_integral_vertex_gradient(coarse, P, uc, zc, f, df);
      vertex_grad = (4.0 * vertex_grad - below) / 3.0;
    }
  }
  if (grad) *grad = support_vertex_jacobian(p.size()).pullback(vertex_grad);
  return value;
}

double pde_source_value(PdeSource source, const Vector2& x) {
  switch (source) {
    case PdeSource::kUnit:
      return 1.0;
    case PdeSource::kBW1: {
      double w = x[0] + 0.4 - x[1] * x[1];
      return 20 * w * w + x[0] * x[0] + x[1] * x[1] - 1;
    }
    case PdeSource::kBW2: {
      double w = x[0] * x[0] + x[1];
      double value = -0.5 + 0.8 * w * w;
      for (int i = 0; i < 5; ++i) {
        double a = (static_cast<double>(i) + 0.5) * kTwoPi / 5;
        Vector2 y(std::sin(a), std::cos(a));
        double b = static_cast<double>(i) * kTwoPi / 5;
        Vector2 z = 1.2 * Vector2(std::sin(b), std::cos(b));
        value += 2 * std::exp(-8 * (x - y).squaredNorm()) - std::exp(-8 * (x - z).squaredNorm());
      }
      return value;
    }
  }
  throw ValidationError("unknown source");
}

Vector2 pde_source_gradient(PdeSource source, const Vector2& x) {
  switch (source) {
    case PdeSource::kUnit:
      return Vector2::Zero();
    case PdeSource::kBW1: {
      double w = x[0] + 0.4 - x[1] * x[1];
      return 40 * w * Vector2(1, -2 * x[1]) + 2 * x;
    }
    case PdeSource::kBW2: {
      double w = x[0] * x[0] + x[1];
      Vector2 g = 1.6 * w * Vector2(2 * x[0], 1);
      for (int i = 0; i < 5; ++i) {
        double a = (static_cast<double>(i) + 0.5) * kTwoPi / 5;
        Vector2 y(std::sin(a), std::cos(a));
        double b = static_cast<double>(i) * kTwoPi / 5;
        Vector2 z = 1.2 * Vector2(std::sin(b), std::cos(b));
        g += -32 * std::exp(-8 * (x - y).squaredNorm()) * (x - y) +
             16 * std::exp(-8 * (x - z).squaredNorm()) * (x - z);
      }
      return g;
    }
  }
  throw ValidationError("unknown source");
}

Functional make_eigenvalue_functional(Index n, int k, EigenvalueNormalization normalization,
                                      Parametrization kind, const FemSettings& fem,
                                      bool maximize) {
  std::string name = "lambda_" + std::to_string(k);
  if (normalization == EigenvalueNormalization::kTimesArea) name += "_times_area";
  const double flip = maximize ? -1.0 : 1.0;
  return {std::move(name), n, flip,
          [k, normalization, kind, fem, flip](const Vector& x, Vector* g) {
            double v = flip * eigenvalue_functional(x, k, normalization, g, kind, fem);
            if (g && flip < 0) *g = -*g;
            return v;
          }};
}

Functional make_pde_integral_functional(Index n, PdeSource source, const FemSettings& fem) {
  std::string name = source == PdeSource::kUnit    ? "poisson_integral_unit"
                     : source == PdeSource::kBW1   ? "poisson_integral_bw1"
                                                   : "poisson_integral_bw2";
  return {std::move(name), n, 1.0, [source, fem](const Vector& x, Vector* g) {
            return pde_integral_functional(x, source, g, fem);
          }};
}

}  // namespace convopt
