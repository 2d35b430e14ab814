#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "convopt/geometry.hpp"
#include "convopt/types.hpp"

namespace convopt::fem {

using Triangles = Eigen::Matrix<Index, 3, Eigen::Dynamic>;

// Piecewise-linear triangle mesh of a convex polygon.  Boundary edges keep
// their provenance: the polygon edge they subdivide and the arclength
// fractions of their endpoints along it, which is what the hat-basis and
// vertex-gradient assemblies need.
struct Mesh {
  Matrix2X nodes;           // 2 x num_nodes
  Triangles triangles;      // 3 x num_triangles, positively oriented
  struct BoundaryEdge {
    Index a = 0, b = 0;     // node ids, (a -> b) counterclockwise
    Index polygon_edge = 0;
    double s_a = 0, s_b = 0;  // arclength fractions along the polygon edge
  };
  std::vector<BoundaryEdge> boundary;
  std::vector<bool> on_boundary;  // per node
  int level = 0;

  Index node_count() const { return nodes.cols(); }
  Index triangle_count() const { return triangles.cols(); }
};

// Structured triangulation: radial rings from the centroid crossed with a
// per-edge tangential subdivision.  The split size starts at
// target_h / sqrt(2) and shrinks until no element edge (quad diagonals
// included) exceeds target_h.  Degenerate polygons (area below
// 1e-10 * diam^2) are rejected.
Mesh mesh_polygon(const ConvexPolygon& P, double target_h);

// Uniform red refinement: every triangle splits into four, boundary edges
// into two with interpolated provenance.
Mesh refine(const Mesh& mesh);

double mesh_area(const Mesh& mesh);
double max_edge_length(const Mesh& mesh);

// Nodal coefficients of a piecewise-linear function; Dirichlet-masked nodes
// (the boundary for every problem here) carry the value 0.
struct DiscreteField {
  Vector values;
};

double field_integral(const Mesh& mesh, const DiscreteField& u);

// -Laplace(u) = f with u = 0 on the boundary; P1 elements, Dirichlet
// elimination, sparse Cholesky.  The relative residual of the reduced system
// is checked against 1e-10.
DiscreteField solve_poisson(const Mesh& mesh, const std::function<double(const Vector2&)>& f);

// First k Dirichlet eigenpairs of -Laplace, ascending, eigenfunctions
// mass-normalized.  Shift-invert block subspace iteration with Rayleigh-Ritz
// projection and a deterministic seeded start.
std::vector<std::pair<double, DiscreteField>> eigs(const Mesh& mesh, int k,
                                                   std::uint64_t seed = 7);

// Boundary shape-derivative density sampled on the polygon edges through the
// mesh boundary provenance.  With one field: f = |grad u|^2 per adjacent
// triangle.  With the adjoint: f = -(du/dn)(dq/dn).  The raw element
// gradients carry an O(h) flux bias, so gradients assembled from this
// density inherit it; the vertex-gradient routines below differentiate the
// discrete values exactly instead.
BoundaryDensity boundary_gradient_density(const Mesh& mesh, const ConvexPolygon& P,
                                          const DiscreteField& u,
                                          const DiscreteField* q = nullptr);

// Exact sensitivity of the discrete eigenvalue (mass-normalized u) to polygon
// vertex motion: per-element stiffness and mass derivatives accumulated over
// the boundary nodes and transported through the same (1-s, s) edge weights
// as the density assembly.  Interior-node motion enters the discrete value at
// a higher order and is omitted; agreement with finite differences of the
// full pipeline is O(h^2).
Matrix2X eigenvalue_vertex_gradient(const Mesh& mesh, const ConvexPolygon& P, double lambda,
                                    const DiscreteField& u);

// Same discrete sensitivity for J = int u with -Laplace(u) = f.  Takes the
// auxiliary state z solving -Laplace(z) = 1 (the negated adjoint of J) and
// the source gradient, which the load-quadrature terms need.
Matrix2X poisson_integral_vertex_gradient(const Mesh& mesh, const ConvexPolygon& P,
                                          const DiscreteField& u, const DiscreteField& z,
                                          const std::function<double(const Vector2&)>& f,
                                          const std::function<Vector2(const Vector2&)>& grad_f);

// Richardson extrapolation of an O(h^2) quantity from two refinement levels.
inline double extrapolate(double v_h, double v_half) { return (4 * v_half - v_h) / 3; }

}  // namespace convopt::fem
