#pragma once

#include <string>

#include "convopt/geometry.hpp"
#include "convopt/types.hpp"

namespace convopt {

// Analytic reference bodies: sampling sources for the discretization, bounds
// for inclusion constraints, and fixtures for benchmark comparisons.
enum class ShapeKind { kDisk, kSquare, kReuleaux, kPolygon };

struct ShapeDescriptor {
  ShapeKind kind = ShapeKind::kDisk;
  double radius = 1.0;            // disk
  Vector2 center = {0.0, 0.0};    // disk only; other bodies are centered
  double side = 2.0;              // square
  double width = 1.0;             // Reuleaux triangle (constant width)
  Matrix2X poly;                  // convex polygon, counterclockwise

  static ShapeDescriptor disk(double r, const Vector2& c = {0.0, 0.0}) {
    ShapeDescriptor d;
    d.kind = ShapeKind::kDisk;
    d.radius = r;
    d.center = c;
    return d;
  }
  static ShapeDescriptor square(double side) {
    ShapeDescriptor d;
    d.kind = ShapeKind::kSquare;
    d.side = side;
    return d;
  }
  static ShapeDescriptor reuleaux(double width) {
    ShapeDescriptor d;
    d.kind = ShapeKind::kReuleaux;
    d.width = width;
    return d;
  }
  // Throws ValidationError when the vertex list is not convex counterclockwise.
  static ShapeDescriptor polygon(const Matrix2X& vertices);
};

// Exact support function h(theta) = max_{x in K} x . u(theta).
double shape_support(const ShapeDescriptor& shape, double theta);

// Exact gauge function (reciprocal radial function); requires the origin in
// the interior of the body.
double shape_gauge(const ShapeDescriptor& shape, double theta);

double shape_diameter(const ShapeDescriptor& shape);

// Support samples on the uniform n-grid.
Vector sample_support(const ShapeDescriptor& shape, Index n);

// Gauge samples on the uniform n-grid.
Vector sample_gauge(const ShapeDescriptor& shape, Index n);

// Dense polygonal stand-in for the exact body (for Hausdorff comparisons).
ConvexPolygon shape_fixture_polygon(const ShapeDescriptor& shape, Index n = 2048);

std::string shape_name(const ShapeDescriptor& shape);

}  // namespace convopt
