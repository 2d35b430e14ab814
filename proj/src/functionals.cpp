#include "convopt/functionals.hpp"

#include <cmath>
#include <utility>

namespace convopt {

Vector VertexJacobian::pullback(const Matrix2X& vertex_grad) const {
  if (vertex_grad.cols() != n) throw ValidationError("vertex gradient has wrong size");
  Vector g(n);
  if (grid == AngleGrid::kNormal) {
    const double two_sin_h = 2 * std::sin(grid_step(n));
    for (Index j = 0; j < n; ++j) {
      const double theta = grid_step(n) * static_cast<double>(j);
      const Index prev = mod_index(j - 1, n), next = mod_index(j + 1, n);
      const double theta_prev = grid_step(n) * static_cast<double>(prev);
      const double theta_next = grid_step(n) * static_cast<double>(next);
      g[j] = vertex_grad.col(j).dot(radial(theta)) +
             (vertex_grad.col(prev).dot(tangential(theta_prev)) -
              vertex_grad.col(next).dot(tangential(theta_next))) /
                 two_sin_h;
    }
  } else {
    for (Index j = 0; j < n; ++j) {
      const double theta = grid_step(n) * static_cast<double>(j);
      g[j] = -vertex_grad.col(j).dot(radial(theta)) / (params[j] * params[j]);
    }
  }
  return g;
}

Matrix2X VertexJacobian::push(const Vector& dp) const {
  if (dp.size() != n) throw ValidationError("perturbation has wrong size");
  Matrix2X dA(2, n);
  if (grid == AngleGrid::kNormal) {
    const double two_sin_h = 2 * std::sin(grid_step(n));
    for (Index i = 0; i < n; ++i) {
      const double theta = grid_step(n) * static_cast<double>(i);
      dA.col(i) = dp[i] * radial(theta) +
                  (dp[mod_index(i + 1, n)] - dp[mod_index(i - 1, n)]) / two_sin_h *
                      tangential(theta);
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      const double theta = grid_step(n) * static_cast<double>(i);
      dA.col(i) = -dp[i] / (params[i] * params[i]) * radial(theta);
    }
  }
  return dA;
}

VertexJacobian support_vertex_jacobian(Index n) { return {n, AngleGrid::kNormal, {}}; }

VertexJacobian gauge_vertex_jacobian(const GaugeVector& params) {
  return {params.size(), AngleGrid::kRadial, params};
}

double area_functional(const SupportVector& p, Vector* grad, GradientMode mode) {
  ConvexPolygon P = support_polygon(p);
  double value = polygon_area(P);
  if (grad) {
    switch (mode) {
      case GradientMode::kExact:
        *grad = support_vertex_jacobian(p.size()).pullback(area_vertex_gradient(P));
        break;
      case GradientMode::kBoundaryDensity: {
        BoundaryDensity ones = boundary_density(P, [](const Vector2&) { return 1.0; });
        *grad = hat_boundary_integrals(P, ones);
        break;
      }
      case GradientMode::kCurvatureRadii:
        *grad = curvature_radii(p) * grid_step(p.size());
        break;
    }
  }
  return value;
}

double perimeter_functional(const SupportVector& p, Vector* grad, PerimeterVariant variant,
                            double tau_seg) {
  const Index n = p.size();
  const double h = grid_step(n);
  if (variant == PerimeterVariant::kCanonical) {
    ConvexPolygon P = support_polygon(p);
    double value = polygon_perimeter(P);
    if (grad) *grad = support_vertex_jacobian(n).pullback(perimeter_vertex_gradient(P));
    return value;
  }
  // Quadrature variant: h * sum(p); boundary segments show up as jumps of the
  // tangential coefficient q_i - q_{i-1} (the discrete p'(theta+) - p'(theta-))
  // and their lengths are added to the value once they pass the threshold.
  support_polygon(p);  // feasibility gate
  if (tau_seg < 0) tau_seg = 10 * h;
  Vector q = tangential_coeffs(p);
  double value = h * p.sum();
  for (Index i = 0; i < n; ++i) {
    double jump = q[i] - q[mod_index(i - 1, n)];
    if (jump > tau_seg) value += jump;
  }
  if (grad) *grad = Vector::Constant(n, kTwoPi / static_cast<double>(n));
  return value;
}

double area_perimeter_tradeoff(const SupportVector& p, double mu, Vector* grad) {
  if (!(mu > 0)) throw ValidationError("tradeoff weight mu must be positive");
  ConvexPolygon P = support_polygon(p);
  double value = mu * polygon_area(P) - polygon_perimeter(P);
  if (grad) {
    Matrix2X vg = mu * area_vertex_gradient(P) - perimeter_vertex_gradient(P);
    *grad = support_vertex_jacobian(p.size()).pullback(vg);
  }
  return value;
}

double mahler_functional(const Vector& params, Vector* grad) {
  if (params.minCoeff() <= 0)
    throw ValidationError("polar pair requires strictly positive parameters");
  auto [body, dual] = polar_pair(params);
  double a = polygon_area(body), b = polygon_area(dual);
  if (grad) {
    Vector ga = support_vertex_jacobian(params.size()).pullback(area_vertex_gradient(body));
    Vector gb = gauge_vertex_jacobian(params).pullback(area_vertex_gradient(dual));
    *grad = b * ga + a * gb;
  }
  return a * b;
}

Functional make_area_functional(Index n, GradientMode mode) {
  return {"area", n, 1.0,
          [mode](const Vector& p, Vector* g) { return area_functional(p, g, mode); }};
}

Functional make_perimeter_functional(Index n, PerimeterVariant variant) {
  return {"perimeter", n, 1.0,
          [variant](const Vector& p, Vector* g) { return perimeter_functional(p, g, variant); }};
}

Functional make_area_perimeter_tradeoff(Index n, double mu) {
  return {"area_perimeter_tradeoff", n, 1.0,
          [mu](const Vector& p, Vector* g) { return area_perimeter_tradeoff(p, mu, g); }};
}

Functional make_mahler_functional(Index n) {
  return {"mahler", n, 1.0, [](const Vector& p, Vector* g) { return mahler_functional(p, g); }};
}

}  // namespace convopt
