#include "convopt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "convopt/formulas.hpp"

namespace convopt {

namespace {

double triple_area(const ConvexPolygon& P, Index i) {
  Vector2 a = P.vertex(i - 1), b = P.vertex(i), c = P.vertex(i + 1);
  return oriented_area(a.x(), a.y(), b.x(), b.y(), c.x(), c.y());
}

double point_segment_distance(const Vector2& x, const Vector2& a, const Vector2& b) {
  Vector2 e = b - a;
  double len2 = e.squaredNorm();
  if (len2 <= 0) return (x - a).norm();
  double t = std::clamp((x - a).dot(e) / len2, 0.0, 1.0);
  return (x - (a + t * e)).norm();
}

}  // namespace

ConvexPolygon make_polygon(const Matrix2X& vertices, AngleGrid grid) {
  if (vertices.cols() < 3) throw ValidationError("polygon needs at least 3 vertices");
  ConvexPolygon P;
  P.vertices = vertices;
  P.grid = grid;
  P.grid_angles.resize(vertices.cols());
  for (Index i = 0; i < vertices.cols(); ++i)
    P.grid_angles[i] = wrap_angle(std::atan2(vertices(1, i), vertices(0, i)));
  return P;
}

double polygon_area(const ConvexPolygon& P) {
  double acc = 0;
  for (Index i = 0; i < P.size(); ++i) acc += cross2(P.vertex(i), P.vertex(i + 1));
  return acc / 2;
}

double polygon_perimeter(const ConvexPolygon& P) {
  double acc = 0;
  for (Index i = 0; i < P.size(); ++i) acc += P.edge_length(i);
  return acc;
}

Vector2 polygon_centroid(const ConvexPolygon& P) {
  double area = polygon_area(P);
  if (std::abs(area) < 1e-300) return P.vertices.rowwise().mean();
  Vector2 acc = Vector2::Zero();
  for (Index i = 0; i < P.size(); ++i) {
    double w = cross2(P.vertex(i), P.vertex(i + 1));
    acc += w * (P.vertex(i) + P.vertex(i + 1));
  }
  return acc / (6 * area);
}

double polygon_diameter(const ConvexPolygon& P) {
  double best = 0;
  for (Index i = 0; i < P.size(); ++i)
    for (Index j = i + 1; j < P.size(); ++j)
      best = std::max(best, (P.vertex(i) - P.vertex(j)).norm());
  return best;
}

double polygon_support(const ConvexPolygon& P, double theta) {
  Vector2 u = radial(theta);
  return (P.vertices.transpose() * u).maxCoeff();
}

bool is_convex(const ConvexPolygon& P, double tol, std::vector<Index>* violations) {
  bool ok = true;
  for (Index i = 0; i < P.size(); ++i) {
    if (triple_area(P, i) < -tol) {
      ok = false;
      if (violations) violations->push_back(i);
    }
  }
  return ok;
}

double distance_to_polygon(const Vector2& x, const ConvexPolygon& P) {
  bool inside = true;
  for (Index i = 0; i < P.size() && inside; ++i) {
    Vector2 e = P.edge(i);
    if (e.squaredNorm() <= 0) continue;
    if (cross2(e, x - P.vertex(i)) < 0) inside = false;
  }
  if (inside) return 0;
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < P.size(); ++i)
    best = std::min(best, point_segment_distance(x, P.vertex(i), P.vertex(i + 1)));
  return best;
}

double hausdorff_distance(const ConvexPolygon& P, const ConvexPolygon& Q) {
  // For convex sets the directed distances are attained at vertices.
  double d = 0;
  for (Index i = 0; i < P.size(); ++i)
    d = std::max(d, distance_to_polygon(P.vertex(i), Q));
  for (Index i = 0; i < Q.size(); ++i)
    d = std::max(d, distance_to_polygon(Q.vertex(i), P));
  return d;
}

double aligned_hausdorff_distance(const ConvexPolygon& P, const ConvexPolygon& Q,
                                  Index angular_resolution) {
  // Hausdorff distance between convex bodies equals the sup-norm difference of
  // their support functions; minimize it over a dense grid of rotations after
  // shifting both centroids to the origin.
  const Index m = angular_resolution;
  Vector2 cp = polygon_centroid(P), cq = polygon_centroid(Q);
  Vector hp(m), hq(m);
  ConvexPolygon Pc = P, Qc = Q;
  Pc.vertices.colwise() -= cp;
  Qc.vertices.colwise() -= cq;
  for (Index j = 0; j < m; ++j) {
    double theta = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
    hp[j] = polygon_support(Pc, theta);
    hq[j] = polygon_support(Qc, theta);
  }
  double best = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < m; ++k) {
    double worst = 0;
    for (Index j = 0; j < m; ++j) {
      worst = std::max(worst, std::abs(hp[(j + k) % m] - hq[j]));
      if (worst >= best) break;
    }
    best = std::min(best, worst);
  }
  return best;
}

ConvexPolygon convex_hull(const Matrix2X& points) {
  // Andrew's monotone chain.
  std::vector<Vector2> pts(static_cast<size_t>(points.cols()));
  for (Index i = 0; i < points.cols(); ++i) pts[static_cast<size_t>(i)] = points.col(i);
  std::sort(pts.begin(), pts.end(), [](const Vector2& a, const Vector2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vector2& a, const Vector2& b) { return a == b; }),
            pts.end());
  if (pts.size() < 3) throw ValidationError("convex hull needs at least 3 distinct points");
  auto build = [&](auto begin, auto end) {
    std::vector<Vector2> chain;
    for (auto it = begin; it != end; ++it) {
      while (chain.size() >= 2 &&
             cross2(chain.back() - chain[chain.size() - 2], *it - chain.back()) <= 0)
        chain.pop_back();
      chain.push_back(*it);
    }
    return chain;
  };
  std::vector<Vector2> lower = build(pts.begin(), pts.end());
  std::vector<Vector2> upper = build(pts.rbegin(), pts.rend());
  lower.pop_back();
  upper.pop_back();
  lower.insert(lower.end(), upper.begin(), upper.end());
  Matrix2X hull(2, static_cast<Index>(lower.size()));
  for (size_t i = 0; i < lower.size(); ++i) hull.col(static_cast<Index>(i)) = lower[i];
  return make_polygon(hull, AngleGrid::kRadial);
}

ConvexPolygon polar_polygon(const ConvexPolygon& P) {
  double scale = P.vertices.cwiseAbs().maxCoeff();
  double edge_tol = 1e-14 * std::max(1.0, scale);
  Matrix2X duals(2, P.size());
  Index m = 0;
  for (Index i = 0; i < P.size(); ++i) {
    Vector2 a = P.vertex(i), b = P.vertex(i + 1);
    if ((b - a).norm() <= edge_tol) continue;  // corner of the parametrization
    double det = cross2(a, b);
    if (det <= 1e-12 * std::max(1.0, scale * scale))
      throw ValidationError("polar dual requires the origin strictly inside the polygon");
    duals.col(m++) = Vector2(b.y() - a.y(), a.x() - b.x()) / det;
  }
  if (m < 3) throw ValidationError("polar dual is degenerate");
  ConvexPolygon out = make_polygon(duals.leftCols(m), AngleGrid::kRadial);
  return out;
}

BoundaryDensity boundary_density(const ConvexPolygon& P,
                                 const std::function<double(const Vector2&)>& f) {
  // 3-point Gauss rule on each edge, exact through cubics in arclength.
  static const double kNode = std::sqrt(3.0 / 5.0) / 2.0;
  static const double kS[3] = {0.5 - kNode, 0.5, 0.5 + kNode};
  static const double kW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  BoundaryDensity d;
  d.points.reserve(3 * static_cast<size_t>(P.size()));
  for (Index i = 0; i < P.size(); ++i) {
    double len = P.edge_length(i);
    if (len <= 0) continue;
    Vector2 a = P.vertex(i), e = P.edge(i);
    for (int q = 0; q < 3; ++q) {
      BoundaryQuadPoint pt;
      pt.x = a + kS[q] * e;
      pt.edge = i;
      pt.s = kS[q];
      pt.weight = kW[q] * len;
      pt.value = f(pt.x);
      d.points.push_back(pt);
    }
  }
  return d;
}

double boundary_integral(const ConvexPolygon& P, const BoundaryDensity& density, Index i) {
  const Index n = P.size();
  const Index target = mod_index(i, n);
  double acc = 0;
  for (const auto& q : density.points) {
    if (q.edge == target) acc += q.weight * q.value * (1.0 - q.s);
    if (mod_index(q.edge + 1, n) == target) acc += q.weight * q.value * q.s;
  }
  return acc;
}

Vector hat_boundary_integrals(const ConvexPolygon& P, const BoundaryDensity& density) {
  const Index n = P.size();
  Vector g = Vector::Zero(n);
  for (const auto& q : density.points) {
    g[q.edge] += q.weight * q.value * (1.0 - q.s);
    g[mod_index(q.edge + 1, n)] += q.weight * q.value * q.s;
  }
  return g;
}

Matrix2X boundary_vertex_gradient(const ConvexPolygon& P, const BoundaryDensity& density) {
  const Index n = P.size();
  Matrix2X g = Matrix2X::Zero(2, n);
  for (const auto& q : density.points) {
    Vector2 contribution = q.weight * q.value * P.edge_normal(q.edge);
    g.col(q.edge) += (1.0 - q.s) * contribution;
    g.col(mod_index(q.edge + 1, n)) += q.s * contribution;
  }
  return g;
}

Matrix2X area_vertex_gradient(const ConvexPolygon& P) {
  const Index n = P.size();
  Matrix2X g(2, n);
  for (Index i = 0; i < n; ++i) {
    Vector2 d = P.vertex(i - 1) - P.vertex(i + 1);
    g.col(i) = 0.5 * Vector2(-d.y(), d.x());
  }
  return g;
}

Matrix2X perimeter_vertex_gradient(const ConvexPolygon& P) {
  const Index n = P.size();
  Matrix2X g = Matrix2X::Zero(2, n);
  for (Index i = 0; i < n; ++i) {
    Vector2 e = P.vertex(i + 1) - P.vertex(i);
    double len = e.norm();
    if (len <= 1e-300) continue;
    e /= len;
    g.col(i) -= e;
    g.col(mod_index(i + 1, n)) += e;
  }
  return g;
}

}  // namespace convopt
