#include "convopt/support.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "convopt/formulas.hpp"

namespace convopt {

namespace {

void check_size(const Vector& p) {
  if (p.size() < 3) throw ValidationError("support vector needs at least 3 samples");
}

Vector map_periodic(const Vector& p, double (*kernel)(double, double, double, double)) {
  check_size(p);
  const Index n = p.size();
  const double h = grid_step(n);
  Vector out(n);
  for (Index i = 0; i < n; ++i)
    out[i] = kernel(p[mod_index(i - 1, n)], p[i], p[mod_index(i + 1, n)], h);
  return out;
}

std::string infeasible_message(const std::vector<Index>& bad) {
  std::ostringstream os;
  os << "support samples violate convexity at indices";
  for (Index i : bad) os << ' ' << i;
  return os.str();
}

ConvexPolygon build_polygon(const Vector& p, const Vector& q) {
  const Index n = p.size();
  ConvexPolygon P;
  P.grid = AngleGrid::kNormal;
  P.grid_angles.resize(n);
  P.vertices.resize(2, n);
  for (Index i = 0; i < n; ++i) {
    double theta = grid_step(n) * static_cast<double>(i);
    P.grid_angles[i] = theta;
    P.vertices.col(i) = p[i] * radial(theta) + q[i] * tangential(theta);
  }
  return P;
}

}  // namespace

Vector curvature_radii(const SupportVector& p) {
  return map_periodic(p, &curvature_radius<double>);
}

Vector curvature_radii_fd(const SupportVector& p) {
  return map_periodic(p, &curvature_radius_fd<double>);
}

Vector curvature_radii_fe(const SupportVector& p) {
  return map_periodic(p, &curvature_radius_fe<double>);
}

Vector tangential_coeffs(const SupportVector& p) {
  check_size(p);
  const Index n = p.size();
  const double h = grid_step(n);
  Vector q(n);
  for (Index i = 0; i < n; ++i)
    q[i] = tangential_coeff(p[mod_index(i - 1, n)], p[mod_index(i + 1, n)], h);
  return q;
}

ConvexPolygon support_polygon(const SupportVector& p) {
  Vector rho = curvature_radii(p);
  const double tol = feasibility_tolerance(p);
  std::vector<Index> bad;
  for (Index i = 0; i < rho.size(); ++i)
    if (rho[i] < -tol) bad.push_back(i);
  if (!bad.empty()) throw InfeasibleParameters(infeasible_message(bad), bad);
  return build_polygon(p, tangential_coeffs(p));
}

ConvexPolygon support_polygon_fd(const SupportVector& p) {
  check_size(p);
  const Index n = p.size();
  const double h = grid_step(n);
  Vector q(n);
  for (Index i = 0; i < n; ++i)
    q[i] = tangential_coeff_fd(p[mod_index(i - 1, n)], p[mod_index(i + 1, n)], h);
  return build_polygon(p, q);
}

LinearConstraintSet convexity_constraints(Index n, ConvexityMode mode) {
  if (n < 3) throw ValidationError("need at least 3 samples");
  const double h = grid_step(n);
  double c_mid = 0, c_adj = 0;
  switch (mode) {
    case ConvexityMode::kRigorous:
      c_mid = -2 * std::cos(h);
      c_adj = 1;
      break;
    case ConvexityMode::kFiniteDifference:
      c_mid = 1 - 2 / (h * h);
      c_adj = 1 / (h * h);
      break;
    case ConvexityMode::kFiniteElement:
      c_mid = 2.0 / 3.0 - 2 / (h * h);
      c_adj = 1.0 / 6.0 + 1 / (h * h);
      break;
  }
  LinearConstraintSet set(n);
  for (Index i = 0; i < n; ++i) {
    set.add_ineq({{mod_index(i - 1, n), c_adj}, {i, c_mid}, {mod_index(i + 1, n), c_adj}},
                 0.0, {ConstraintFamily::kConvexity, i});
  }
  return set;
}

Vector pair_widths(const SupportVector& p) {
  const Index n = p.size();
  if (n % 2 != 0) throw ValidationError("widths need an even number of samples");
  Vector w(n / 2);
  for (Index i = 0; i < n / 2; ++i) w[i] = p[i] + p[i + n / 2];
  return w;
}

LinearConstraintSet width_constraints(Index n, const Vector& lo, const Vector& hi) {
  if (n % 2 != 0) throw ValidationError("width constraints need even n");
  if (lo.size() != n / 2 || hi.size() != n / 2)
    throw ValidationError("width bounds need n/2 entries");
  LinearConstraintSet set(n);
  for (Index i = 0; i < n / 2; ++i) {
    const Index j = i + n / 2;
    const bool has_lo = std::isfinite(lo[i]);
    const bool has_hi = std::isfinite(hi[i]);
    if (has_lo && has_hi && lo[i] > hi[i])
      throw ValidationError("contradictory width bounds at pair " + std::to_string(i));
    if (has_lo && has_hi && lo[i] == hi[i]) {
      set.add_eq({{i, 1.0}, {j, 1.0}}, lo[i], {ConstraintFamily::kWidthEqual, i});
      continue;
    }
    if (has_lo)
      set.add_ineq({{i, 1.0}, {j, 1.0}}, lo[i], {ConstraintFamily::kWidthLower, i});
    if (has_hi)
      set.add_ineq({{i, -1.0}, {j, -1.0}}, -hi[i], {ConstraintFamily::kWidthUpper, i});
  }
  return set;
}

LinearConstraintSet width_constraints(Index n, double lo, double hi) {
  if (n % 2 != 0) throw ValidationError("width constraints need even n");
  return width_constraints(n, Vector::Constant(n / 2, lo), Vector::Constant(n / 2, hi));
}

LinearConstraintSet constant_width_constraints(Index n, double w) {
  return width_constraints(n, w, w);
}

LinearConstraintSet diameter_constraints(Index n, double d) {
  if (n % 2 != 0) throw ValidationError("diameter constraints need even n");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Vector lo = Vector::Constant(n / 2, nan);
  Vector hi = Vector::Constant(n / 2, d);
  lo[0] = d;  // the diameter is attained on pair 0
  return width_constraints(n, lo, hi);
}

LinearConstraintSet symmetry_constraints(Index n) {
  if (n % 2 != 0) throw ValidationError("symmetry constraints need even n");
  LinearConstraintSet set(n);
  for (Index i = 0; i < n / 2; ++i)
    set.add_eq({{i, 1.0}, {i + n / 2, -1.0}}, 0.0, {ConstraintFamily::kSymmetry, i});
  return set;
}

LinearConstraintSet inclusion_constraints(const Vector& outer_support) {
  LinearConstraintSet set(outer_support.size());
  for (Index i = 0; i < outer_support.size(); ++i)
    set.add_ineq({{i, -1.0}}, -outer_support[i], {ConstraintFamily::kInclusionUpper, i});
  return set;
}

LinearConstraintSet inclusion_lower_constraints(const Vector& inner_support) {
  LinearConstraintSet set(inner_support.size());
  for (Index i = 0; i < inner_support.size(); ++i)
    set.add_ineq({{i, 1.0}}, inner_support[i], {ConstraintFamily::kInclusionLower, i});
  return set;
}

LinearConstraintSet inclusion_constraints_edges(const ShapeDescriptor& outer_polygon, Index n) {
  Matrix2X corners;
  if (outer_polygon.kind == ShapeKind::kSquare) {
    double r = outer_polygon.side / 2;
    corners.resize(2, 4);
    corners << r, -r, -r, r, r, r, -r, -r;
  } else if (outer_polygon.kind == ShapeKind::kPolygon) {
    corners = outer_polygon.poly;
  } else {
    throw ValidationError("edge-normal inclusion needs a polygonal outer body");
  }
  ConvexPolygon P = make_polygon(corners, AngleGrid::kRadial);
  LinearConstraintSet set(n);
  const double h = grid_step(n);
  std::vector<bool> used(static_cast<size_t>(n), false);
  for (Index e = 0; e < P.size(); ++e) {
    if (P.edge_length(e) <= 0) continue;
    Vector2 nrm = P.edge_normal(e);
    double angle = wrap_angle(std::atan2(nrm.y(), nrm.x()));
    Index i = mod_index(static_cast<Index>(std::llround(angle / h)), n);
    if (used[static_cast<size_t>(i)]) continue;
    used[static_cast<size_t>(i)] = true;
    double bound = shape_support(outer_polygon, grid_step(n) * static_cast<double>(i));
    set.add_ineq({{i, -1.0}}, -bound, {ConstraintFamily::kInclusionUpper, i});
  }
  return set;
}

}  // namespace convopt
