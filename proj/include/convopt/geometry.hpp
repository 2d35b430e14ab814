#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "convopt/types.hpp"

namespace convopt {

// Which angle the per-vertex grid parameter refers to.
enum class AngleGrid {
  kNormal,  // vertex i sits on the support line with outward normal theta_i
  kRadial,  // vertex i sits on the ray of direction theta_i
};

// Closed convex polygon, vertices in counterclockwise order.  Vertices may
// repeat (zero-length edges encode corners of the parametrization), so the
// vertex count is the grid size n, not the number of geometric corners.
struct ConvexPolygon {
  Matrix2X vertices;     // 2 x n
  Vector grid_angles;    // n, increasing in [0, 2*pi)
  AngleGrid grid = AngleGrid::kNormal;

  Index size() const { return vertices.cols(); }
  Vector2 vertex(Index i) const { return vertices.col(mod_index(i, size())); }
  // Chord from vertex i to vertex i+1.
  Vector2 edge(Index i) const { return vertex(i + 1) - vertex(i); }
  double edge_length(Index i) const { return edge(i).norm(); }
  // Grid angle annotated to edge i: midpoint of the adjacent vertex angles.
  double edge_angle(Index i) const {
    return grid_angles[mod_index(i, size())] + kPi / static_cast<double>(size());
  }
  // Outward unit normal of edge i computed from the chord geometry; falls
  // back to the grid annotation for zero-length edges.
  Vector2 edge_normal(Index i) const {
    Vector2 e = edge(i);
    double len = e.norm();
    if (len < 1e-300) return radial(edge_angle(i));
    return Vector2(e.y(), -e.x()) / len;
  }
};

ConvexPolygon make_polygon(const Matrix2X& vertices, AngleGrid grid = AngleGrid::kRadial);

double polygon_area(const ConvexPolygon& P);
double polygon_perimeter(const ConvexPolygon& P);
Vector2 polygon_centroid(const ConvexPolygon& P);
// Largest pairwise vertex distance.
double polygon_diameter(const ConvexPolygon& P);

// Support function of the polygon: max over vertices of x . u(theta).
double polygon_support(const ConvexPolygon& P, double theta);

// All consecutive-triple oriented areas are >= -tol.  When violations is
// non-null the indices of offending middle vertices are appended.
bool is_convex(const ConvexPolygon& P, double tol, std::vector<Index>* violations = nullptr);

// Euclidean distance from a point to the polygon (0 inside).
double distance_to_polygon(const Vector2& x, const ConvexPolygon& P);

// Hausdorff distance between two convex polygons (exact: directed distances
// are attained at vertices).
double hausdorff_distance(const ConvexPolygon& P, const ConvexPolygon& Q);

// Hausdorff distance after centering both polygons on their centroids and
// minimizing over rotations; a congruence-invariant shape proximity measure
// for comparing optimizer output against reference fixtures.
double aligned_hausdorff_distance(const ConvexPolygon& P, const ConvexPolygon& Q,
                                  Index angular_resolution = 2048);

// Convex hull of a point cloud (counterclockwise, no duplicate points).
ConvexPolygon convex_hull(const Matrix2X& points);

// Polar dual {y : x . y <= 1 for all x in P}.  Requires the origin strictly
// inside; vertices of the result correspond to edges of P (zero-length edges
// of P are skipped).  Throws ValidationError otherwise.
ConvexPolygon polar_polygon(const ConvexPolygon& P);

// Periodic piecewise-linear hat functions on the uniform angle grid.
struct HatBasis {
  Index n = 0;
  double h = 0;

  explicit HatBasis(Index n_) : n(n_), h(grid_step(n_)) {}
  // psi_i(theta): 1 at theta_i, 0 at the neighboring grid angles.
  double operator()(Index i, double theta) const {
    double d = std::abs(wrap_signed(theta - h * static_cast<double>(i)));
    return d >= h ? 0.0 : 1.0 - d / h;
  }
};

// Scalar density sampled on the boundary of a polygon: per quadrature point
// the location, the polygon edge it originates from, the arclength fraction
// along that edge, the quadrature weight (summing to edge length), and the
// density value.
struct BoundaryQuadPoint {
  Vector2 x;
  Index edge = 0;
  double s = 0;       // arclength fraction along the originating polygon edge
  double weight = 0;
  double value = 0;
};

struct BoundaryDensity {
  std::vector<BoundaryQuadPoint> points;

  double integral() const {
    double acc = 0;
    for (const auto& q : points) acc += q.weight * q.value;
    return acc;
  }
};

// Sample a scalar field along each polygon edge with a 3-point Gauss rule.
BoundaryDensity boundary_density(const ConvexPolygon& P,
                                 const std::function<double(const Vector2&)>& f);

// Integral of f * psi_i over the boundary.  The hat argument is transported
// along each edge proportionally to arclength between the two vertex grid
// angles, so a quadrature point at fraction s of edge e contributes with
// psi_e = 1 - s and psi_{e+1} = s.
double boundary_integral(const ConvexPolygon& P, const BoundaryDensity& density, Index i);

// All n hat integrals in one sweep.
Vector hat_boundary_integrals(const ConvexPolygon& P, const BoundaryDensity& density);

// Exact discrete Hadamard transport: per vertex v, the vector
//   sum over incident edges e of  int_e f phi_v n_e dsigma,
// with phi_v the affine vertex weight along the edge and n_e its outward
// normal.  Dotting column v with a vertex displacement field and summing
// gives the first-order change of the shape functional whose boundary
// density is f; pulled back through a VertexJacobian it yields parameter
// gradients that match finite differences of the fully discrete pipeline.
Matrix2X boundary_vertex_gradient(const ConvexPolygon& P, const BoundaryDensity& density);

// dArea/dA_i = perp(A_{i-1} - A_{i+1}) / 2 from the shoelace formula.
Matrix2X area_vertex_gradient(const ConvexPolygon& P);

// dPerimeter/dA_i = unit(A_i - A_{i+1}) + unit(A_i - A_{i-1}); zero-length
// edges (coincident vertices at corner fans) contribute nothing.
Matrix2X perimeter_vertex_gradient(const ConvexPolygon& P);

}  // namespace convopt
