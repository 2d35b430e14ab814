#include "convopt/gauge.hpp"

#include <cmath>
#include <sstream>

namespace convopt {

ConvexPolygon gauge_polygon(const GaugeVector& gamma) {
  if (gamma.size() < 3) throw ValidationError("gauge vector needs at least 3 samples");
  const Index n = gamma.size();
  std::vector<Index> bad;
  for (Index i = 0; i < n; ++i)
    if (!(gamma[i] > 0)) bad.push_back(i);
  if (!bad.empty()) {
    std::ostringstream os;
    os << "gauge samples must be positive; offending indices";
    for (Index i : bad) os << ' ' << i;
    throw InfeasibleParameters(os.str(), bad);
  }
  ConvexPolygon P;
  P.grid = AngleGrid::kRadial;
  P.grid_angles.resize(n);
  P.vertices.resize(2, n);
  for (Index i = 0; i < n; ++i) {
    double theta = grid_step(n) * static_cast<double>(i);
    P.grid_angles[i] = theta;
    P.vertices.col(i) = radial(theta) / gamma[i];
  }
  return P;
}

LinearConstraintSet gauge_convexity_constraints(Index n) {
  return convexity_constraints(n, ConvexityMode::kRigorous);
}

std::pair<ConvexPolygon, ConvexPolygon> polar_pair(const Vector& params) {
  return {support_polygon(params), gauge_polygon(params)};
}

Vector gauge_hat_gradient(const ConvexPolygon& P, const GaugeVector& gamma,
                          const BoundaryDensity& density) {
  const Index n = P.size();
  if (gamma.size() != n) throw ValidationError("gauge vector does not match polygon size");
  Vector g = Vector::Zero(n);
  // Cache the radial directions and edge normals once per call.
  Matrix2X r(2, n);
  for (Index i = 0; i < n; ++i) r.col(i) = radial(P.grid_angles[i]);
  std::vector<Vector2> nrm(static_cast<size_t>(n));
  for (Index e = 0; e < n; ++e) nrm[static_cast<size_t>(e)] = P.edge_normal(e);
  for (const auto& q : density.points) {
    const Index e = q.edge;
    const Index e1 = mod_index(e + 1, n);
    const Vector2& ne = nrm[static_cast<size_t>(e)];
    g[e] += q.weight * q.value * (1.0 - q.s) * ne.dot(r.col(e));
    g[e1] += q.weight * q.value * q.s * ne.dot(r.col(e1));
  }
  for (Index i = 0; i < n; ++i) g[i] *= -1.0 / (gamma[i] * gamma[i]);
  return g;
}

LinearConstraintSet gauge_inclusion_constraints(const ShapeDescriptor& outer, Index n) {
  LinearConstraintSet set(n);
  for (Index i = 0; i < n; ++i) {
    double bound = shape_gauge(outer, grid_step(n) * static_cast<double>(i));
    set.add_ineq({{i, 1.0}}, bound, {ConstraintFamily::kInclusionUpper, i});
  }
  return set;
}

LinearConstraintSet gauge_inclusion_lower_constraints(const ShapeDescriptor& inner, Index n) {
  LinearConstraintSet set(n);
  for (Index i = 0; i < n; ++i) {
    double bound = shape_gauge(inner, grid_step(n) * static_cast<double>(i));
    set.add_ineq({{i, -1.0}}, -bound, {ConstraintFamily::kInclusionLower, i});
  }
  return set;
}

}  // namespace convopt
