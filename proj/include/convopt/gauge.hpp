#pragma once

#include <utility>

#include "convopt/constraints.hpp"
#include "convopt/geometry.hpp"
#include "convopt/support.hpp"
#include "convopt/types.hpp"

namespace convopt {

// Star-shaped description: n samples of the gauge function (reciprocal radial
// function) on the uniform angle grid.  Convexity is governed by the same
// rigorous three-term rows as the support discretization.
using GaugeVector = Vector;

// Vertices A_i = (1/gamma_i) r(theta_i).  Throws InfeasibleParameters when
// some gamma_i <= 0.
ConvexPolygon gauge_polygon(const GaugeVector& gamma);

// Identical rigorous rows applied to the gauge samples.
LinearConstraintSet gauge_convexity_constraints(Index n);

// The same parameter vector read simultaneously as a support function and as
// a gauge function describes a body together with (a polygonal inscription of)
// its polar dual; returns {body, polar}.
std::pair<ConvexPolygon, ConvexPolygon> polar_pair(const Vector& params);

// Pull a boundary density back to gauge parameter derivatives:
//   g_i = -(1/gamma_i^2) * integral of f(x) psi_i (n . r_i) over the boundary,
// with the hat transported along each edge proportionally to arclength and
// the edge normal constant per edge.
Vector gauge_hat_gradient(const ConvexPolygon& P, const GaugeVector& gamma,
                          const BoundaryDensity& density);

// Pointwise gauge bounds: containment in `outer` means gamma_i >= gauge_outer
// at every grid angle, containment of `inner` means gamma_i <= gauge_inner.
LinearConstraintSet gauge_inclusion_constraints(const ShapeDescriptor& outer, Index n);
LinearConstraintSet gauge_inclusion_lower_constraints(const ShapeDescriptor& inner, Index n);

}  // namespace convopt
