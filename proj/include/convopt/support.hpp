#pragma once

#include "convopt/constraints.hpp"
#include "convopt/geometry.hpp"
#include "convopt/shapes.hpp"
#include "convopt/types.hpp"

namespace convopt {

// A convex body is described by n samples of its support function on the
// uniform angle grid theta_i = 2*pi*i/n.  All index arithmetic is periodic.
using SupportVector = Vector;

// Discretization schemes for the curvature radii / convexity rows.  Only the
// trigonometric scheme guarantees a convex polygon; the finite-difference and
// lumped variants exist for comparison experiments and oracle tests.
enum class ConvexityMode { kRigorous, kFiniteDifference, kFiniteElement };

// Discrete curvature radii rho_i = (p_{i+1} + p_{i-1} - 2 p_i cos h)/(2 - 2 cos h).
Vector curvature_radii(const SupportVector& p);
Vector curvature_radii_fd(const SupportVector& p);
Vector curvature_radii_fe(const SupportVector& p);

// Tangential vertex coefficients q_i = (p_{i+1} - p_{i-1})/(2 sin h).
Vector tangential_coeffs(const SupportVector& p);

// Vertices A_i = p_i r(theta_i) + q_i t(theta_i).  Throws InfeasibleParameters
// (naming the indices) when some curvature radius is below -tolerance; the
// resulting polygon is then guaranteed convex up to roundoff.
ConvexPolygon support_polygon(const SupportVector& p);

// Same construction with plain central differences for q_i and no feasibility
// check.  Used by the comparison experiments: a vector can satisfy the
// finite-difference convexity rows and still produce a non-convex polygon.
ConvexPolygon support_polygon_fd(const SupportVector& p);

// n rows, one per grid index.  The rigorous rows are the numerators
// p_{i+1} + p_{i-1} - 2 p_i cos h >= 0 (positive multiples of the radii).
LinearConstraintSet convexity_constraints(Index n, ConvexityMode mode = ConvexityMode::kRigorous);

// Width of direction pair i: p_i + p_{i+n/2}.  Requires even n.
Vector pair_widths(const SupportVector& p);

// lo_i <= p_i + p_{i+n/2} <= hi_i for i < n/2.  Scalar bounds broadcast; NaN
// disables a side; rows with lo_i == hi_i are emitted as equalities.
LinearConstraintSet width_constraints(Index n, const Vector& lo, const Vector& hi);
LinearConstraintSet width_constraints(Index n, double lo, double hi);

// Constant width w: n/2 equality rows.
LinearConstraintSet constant_width_constraints(Index n, double w);

// Diameter d: all pair widths <= d, attained on pair 0 (equality row).
LinearConstraintSet diameter_constraints(Index n, double d);

// Central symmetry p_i = p_{i+n/2}.
LinearConstraintSet symmetry_constraints(Index n);

// Containment in the body with the given support samples: p_i <= outer_i.
LinearConstraintSet inclusion_constraints(const Vector& outer_support);

// Containment of the body with the given support samples: p_i >= inner_i.
LinearConstraintSet inclusion_lower_constraints(const Vector& inner_support);

// Containment in a polygon, imposed only at the grid angles nearest to the
// polygon's edge normals (the support inequality is tight exactly there).
LinearConstraintSet inclusion_constraints_edges(const ShapeDescriptor& outer_polygon, Index n);

}  // namespace convopt
