#pragma once

#include <functional>
#include <string>

#include "convopt/gauge.hpp"
#include "convopt/geometry.hpp"
#include "convopt/support.hpp"
#include "convopt/types.hpp"

namespace convopt {

// Objective carrier used by the optimizer.  `eval` returns the value to be
// minimized and fills the gradient when a target vector is passed.  Builders
// that maximize negate the underlying quantity and set sign = -1 so reports
// can show the original orientation.
struct Functional {
  std::string name;
  Index dim = 0;
  double sign = 1.0;
  std::function<double(const Vector&, Vector*)> eval;

  double value(const Vector& x) const { return eval(x, nullptr); }
  double value_and_gradient(const Vector& x, Vector& grad) const { return eval(x, &grad); }
};

// Sparse chain rule between the parameter vector and the polygon vertices.
// Support vertices A_i = p_i r_i + q_i t_i depend on p_{i-1}, p_i, p_{i+1};
// gauge vertices A_i = r_i / g_i depend on g_i alone.
struct VertexJacobian {
  Index n = 0;
  AngleGrid grid = AngleGrid::kNormal;
  Vector params;  // gauge values; unused for the support map

  // Pull a vertex-space gradient dJ/dA (2 x n) back to parameter space.
  Vector pullback(const Matrix2X& vertex_grad) const;
  // Push a parameter perturbation forward to vertex displacements (2 x n).
  Matrix2X push(const Vector& dp) const;
};

VertexJacobian support_vertex_jacobian(Index n);
VertexJacobian gauge_vertex_jacobian(const GaugeVector& params);

// Gradient flavors for the geometric functionals: the exact chain rule
// through the vertex construction, the boundary-density form (hat-function
// integrals of the shape-derivative density), and for the area the curvature
// radius shortcut g_i = rho_i h.
enum class GradientMode { kExact, kBoundaryDensity, kCurvatureRadii };

double area_functional(const SupportVector& p, Vector* grad = nullptr,
                       GradientMode mode = GradientMode::kExact);

enum class PerimeterVariant { kCanonical, kQuadrature };

// kCanonical: polygon perimeter with the exact chain-rule gradient.
// kQuadrature: h * sum(p) plus, per boundary segment detected by a jump
// q_i - q_{i-1} > tau_seg, the jump itself added to the value; the gradient
// of this variant is the constant 2*pi/n (the segment terms contribute to the
// value only; see the perimeter notes in the repository docs).
double perimeter_functional(const SupportVector& p, Vector* grad = nullptr,
                            PerimeterVariant variant = PerimeterVariant::kCanonical,
                            double tau_seg = -1.0);

// mu * area - perimeter (both canonical); diameter bounds are attached by the
// problem builder, not here.
double area_perimeter_tradeoff(const SupportVector& p, double mu, Vector* grad = nullptr);

// |K| * |K polar| for the polar pair sharing one parameter vector.
double mahler_functional(const Vector& params, Vector* grad = nullptr);

Functional make_area_functional(Index n, GradientMode mode = GradientMode::kExact);
Functional make_perimeter_functional(Index n,
                                     PerimeterVariant variant = PerimeterVariant::kCanonical);
Functional make_area_perimeter_tradeoff(Index n, double mu);
Functional make_mahler_functional(Index n);

// --- FEM-backed functionals (implemented in fem_functionals.cpp) ---

struct FemSettings {
  double target_h = 0.0;    // 0: diam/40 (optimize); reports use diam/80
  int extra_levels = 1;     // refinement levels added for Richardson extrapolation
  bool extrapolate = true;  // two-level Richardson on the scalar value
};

enum class EigenvalueNormalization { kTimesArea, kRaw };
enum class Parametrization { kSupport, kGauge };

// k-th Dirichlet-Laplace eigenvalue of the discrete body (k >= 1), optionally
// multiplied by the area.  The gradient differentiates the assembled discrete
// problem exactly (element matrix sensitivities transported to the polygon
// vertices); the sign is fixed by the finite-difference oracle on a disk
// dilation: eigenvalues shrink when the domain grows.
double eigenvalue_functional(const Vector& params, int k,
                             EigenvalueNormalization normalization, Vector* grad = nullptr,
                             Parametrization kind = Parametrization::kSupport,
                             const FemSettings& fem = {});

enum class PdeSource { kUnit, kBW1, kBW2 };

// J = int_K u with -Delta u = f, u = 0 on the boundary.  The gradient pairs
// the state with the adjoint solve for the integration weights and
// differentiates the assembled system exactly.
double pde_integral_functional(const SupportVector& p, PdeSource source,
                               Vector* grad = nullptr, const FemSettings& fem = {});

// Evaluate a point source field used by pde_integral_functional, and its
// spatial gradient (the exact load-vector derivative needs it).
double pde_source_value(PdeSource source, const Vector2& x);
Vector2 pde_source_gradient(PdeSource source, const Vector2& x);

Functional make_eigenvalue_functional(Index n, int k, EigenvalueNormalization normalization,
                                      Parametrization kind = Parametrization::kSupport,
                                      const FemSettings& fem = {}, bool maximize = false);
Functional make_pde_integral_functional(Index n, PdeSource source, const FemSettings& fem = {});

}  // namespace convopt
