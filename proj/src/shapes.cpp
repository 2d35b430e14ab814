#include "convopt/shapes.hpp"

#include <cmath>
#include <limits>

#include "convopt/formulas.hpp"

namespace convopt {

namespace {

// Corner directions of the Reuleaux triangle (one corner pointing up) and the
// circumradius of the underlying equilateral triangle.
constexpr double kCornerAngle0 = kPi / 2;

double reuleaux_circumradius(double width) { return width / std::sqrt(3.0); }

// Smallest absolute angular distance from theta to a corner direction.
double corner_distance(double theta) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    double alpha = kCornerAngle0 + kTwoPi * k / 3.0;
    best = std::min(best, std::abs(wrap_signed(theta - alpha)));
  }
  return best;
}

}  // namespace

ShapeDescriptor ShapeDescriptor::polygon(const Matrix2X& vertices) {
  ConvexPolygon P = make_polygon(vertices, AngleGrid::kRadial);
  double scale = vertices.cwiseAbs().maxCoeff();
  std::vector<Index> bad;
  if (!is_convex(P, 1e-12 * std::max(1.0, scale * scale), &bad))
    throw ValidationError("polygon descriptor is not convex at vertex " +
                          std::to_string(bad.front()));
  ShapeDescriptor d;
  d.kind = ShapeKind::kPolygon;
  d.poly = vertices;
  return d;
}

double shape_support(const ShapeDescriptor& shape, double theta) {
  Vector2 u = radial(theta);
  switch (shape.kind) {
    case ShapeKind::kDisk:
      return shape.center.dot(u) + shape.radius;
    case ShapeKind::kSquare:
      return shape.side / 2 * (std::abs(u.x()) + std::abs(u.y()));
    case ShapeKind::kReuleaux: {
      // Boundary alternates corners (normal cones of half-width pi/6) with
      // arcs of radius `width` centered at the opposite corner.  Corner ranges
      // give h = d cos(delta); arc ranges follow from the constant width:
      // h(theta) = width - h(theta + pi).
      double d = reuleaux_circumradius(shape.width);
      double delta = corner_distance(theta);
      if (delta <= kPi / 6) return d * std::cos(delta);
      return shape.width - d * std::cos(corner_distance(theta + kPi));
    }
    case ShapeKind::kPolygon:
      return (shape.poly.transpose() * u).maxCoeff();
  }
  throw ValidationError("unknown shape kind");
}

double shape_gauge(const ShapeDescriptor& shape, double theta) {
  Vector2 u = radial(theta);
  switch (shape.kind) {
    case ShapeKind::kDisk: {
      if (shape.center.norm() >= shape.radius)
        throw ValidationError("disk does not contain the origin");
      double cu = shape.center.dot(u);
      double disc = shape.radius * shape.radius - shape.center.squaredNorm() + cu * cu;
      return 1.0 / (cu + std::sqrt(disc));
    }
    case ShapeKind::kSquare:
      return std::max(std::abs(u.x()), std::abs(u.y())) / (shape.side / 2);
    case ShapeKind::kReuleaux: {
      // Intersection of three disks of radius `width` centered at the corners:
      // the radial function is the minimum of the three disk radial functions.
      double d = reuleaux_circumradius(shape.width);
      double w = shape.width;
      double rho = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        double alpha = kCornerAngle0 + kTwoPi * k / 3.0;
        Vector2 c = d * radial(alpha);
        double cu = c.dot(u);
        rho = std::min(rho, cu + std::sqrt(w * w - d * d + cu * cu));
      }
      return 1.0 / rho;
    }
    case ShapeKind::kPolygon: {
      // rho(theta) = min over edges of offset / (u . normal); equivalently the
      // gauge is the support function of the polar body.
      double gamma = 0;
      bool hit = false;
      for (Index i = 0; i < shape.poly.cols(); ++i) {
        Vector2 a = shape.poly.col(i);
        Vector2 b = shape.poly.col((i + 1) % shape.poly.cols());
        Vector2 e = b - a;
        if (e.norm() <= 1e-14 * std::max(1.0, shape.poly.cwiseAbs().maxCoeff())) continue;
        Vector2 nrm = Vector2(e.y(), -e.x()).normalized();
        double offset = nrm.dot(a);
        if (offset <= 0) throw ValidationError("polygon does not contain the origin");
        double along = nrm.dot(u);
        if (along > 0) {
          gamma = std::max(gamma, along / offset);
          hit = true;
        }
      }
      if (!hit) throw ValidationError("degenerate polygon gauge");
      return gamma;
    }
  }
  throw ValidationError("unknown shape kind");
}

double shape_diameter(const ShapeDescriptor& shape) {
  switch (shape.kind) {
    case ShapeKind::kDisk:
      return 2 * shape.radius;
    case ShapeKind::kSquare:
      return shape.side * std::sqrt(2.0);
    case ShapeKind::kReuleaux:
      return shape.width;
    case ShapeKind::kPolygon: {
      double best = 0;
      for (Index i = 0; i < shape.poly.cols(); ++i)
        for (Index j = i + 1; j < shape.poly.cols(); ++j)
          best = std::max(best, (shape.poly.col(i) - shape.poly.col(j)).norm());
      return best;
    }
  }
  throw ValidationError("unknown shape kind");
}

Vector sample_support(const ShapeDescriptor& shape, Index n) {
  if (n < 3) throw ValidationError("need at least 3 support samples");
  Vector p(n);
  for (Index i = 0; i < n; ++i) p[i] = shape_support(shape, grid_step(n) * i);
  return p;
}

Vector sample_gauge(const ShapeDescriptor& shape, Index n) {
  if (n < 3) throw ValidationError("need at least 3 gauge samples");
  Vector g(n);
  for (Index i = 0; i < n; ++i) g[i] = shape_gauge(shape, grid_step(n) * i);
  return g;
}

ConvexPolygon shape_fixture_polygon(const ShapeDescriptor& shape, Index n) {
  if (shape.kind == ShapeKind::kPolygon) return make_polygon(shape.poly, AngleGrid::kRadial);
  Matrix2X v(2, n);
  for (Index i = 0; i < n; ++i) {
    double theta = grid_step(n) * i;
    // Radial sampling keeps the fixture inside the body; at this resolution
    // the polygonal error is negligible for comparison purposes.
    v.col(i) = radial(theta) / shape_gauge(shape, theta);
  }
  ConvexPolygon P = make_polygon(v, AngleGrid::kRadial);
  return P;
}

std::string shape_name(const ShapeDescriptor& shape) {
  switch (shape.kind) {
    case ShapeKind::kDisk:
      return "disk";
    case ShapeKind::kSquare:
      return "square";
    case ShapeKind::kReuleaux:
      return "reuleaux";
    case ShapeKind::kPolygon:
      return "polygon";
  }
  return "unknown";
}

}  // namespace convopt
