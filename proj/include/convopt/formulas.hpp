#pragma once

// Closed-form kernels of the support/gauge discretization.  Everything here is
// a pure function of a few scalars, templated so oracle tests can evaluate the
// same expressions at any precision.

#include <cmath>

namespace convopt {

// Discrete curvature radius from three consecutive support samples on a grid
// with step h.  Exact for p(theta) = c + a*cos(theta) + b*sin(theta), where it
// returns c, and second-order accurate for smooth support functions.
template <class T>
T curvature_radius(T p_prev, T p_mid, T p_next, T h) {
  using std::cos;
  return (p_next + p_prev - T(2) * p_mid * cos(h)) / (T(2) - T(2) * cos(h));
}

// Tangential vertex coefficient: trigonometric central difference of the
// support samples.  Exact for first-harmonic support functions.
template <class T>
T tangential_coeff(T p_prev, T p_next, T h) {
  using std::sin;
  return (p_next - p_prev) / (T(2) * sin(h));
}

// Plain central difference used by the comparison (non-guaranteed) scheme.
template <class T>
T tangential_coeff_fd(T p_prev, T p_next, T h) {
  return (p_next - p_prev) / (T(2) * h);
}

// Curvature radius of the comparison scheme: p + second difference / h^2.
template <class T>
T curvature_radius_fd(T p_prev, T p_mid, T p_next, T h) {
  return p_mid + (p_next - T(2) * p_mid + p_prev) / (h * h);
}

// Mass-lumped variant of the comparison scheme.
template <class T>
T curvature_radius_fe(T p_prev, T p_mid, T p_next, T h) {
  return T(2) / T(3) * p_mid + (p_prev + p_next) / T(6) +
         (p_next - T(2) * p_mid + p_prev) / (h * h);
}

// Oriented area of triangle (a, b, c); positive when counterclockwise.
template <class T>
T oriented_area(T ax, T ay, T bx, T by, T cx, T cy) {
  return ((bx - ax) * (cy - by) - (by - ay) * (cx - bx)) / T(2);
}

// Oriented area of the triangle spanned by three consecutive vertices of a
// support-parametrized shape, written in the discrete curvature radii.  This
// is the identity that makes the convexity constraints rigorous: every factor
// is nonnegative whenever the radii are.
template <class T>
T support_triangle_area(T rho1, T rho2, T rho3, T h) {
  using std::cos;
  using std::sin;
  using std::tan;
  T s = sin(h / T(2));
  return (rho2 * (rho1 + rho3) + T(2) * rho1 * rho3 * cos(h)) * s * s * tan(h / T(2));
}

// Gauge-side companion identity: oriented area of the triangle spanned by
// three consecutive radial vertices (1/gamma_i) r(theta_i).
template <class T>
T gauge_triangle_area(T g1, T g2, T g3, T h) {
  using std::cos;
  using std::sin;
  return (g1 + g3 - T(2) * g2 * cos(h)) * sin(h) / (T(2) * g1 * g2 * g3);
}

// Leading term of the triangle area for the comparison scheme.  The residual
// against the exact cross product is O(h^5), but the bracket is sign-indefinite:
// positivity of the fd radii does not imply a convex polygon.
template <class T>
T fd_triangle_area_leading(T p1, T p3, T rho1, T rho2, T rho3, T h) {
  return h * h * h / T(48) *
         (T(6) * rho1 * rho2 + T(12) * rho1 * rho3 + T(6) * rho2 * rho3 +
          (p1 - p3) * (rho1 - rho3));
}

}  // namespace convopt
