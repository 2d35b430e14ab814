#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "convopt/functionals.hpp"
#include "convopt/optimizer.hpp"
#include "convopt/shapes.hpp"
#include "convopt/types.hpp"

namespace convopt {

// Data-level description of one optimization problem: everything needed to
// rebuild the NlpProblem, so runs are reproducible from the descriptor alone.
// Parsed from / serialized to JSON by the io layer.

struct FunctionalSpec {
  std::string name = "area";  // area | perimeter | area-perimeter | mahler |
                              // eigenvalue | poisson-integral
  int k = 1;                  // eigenvalue index
  double mu = 1.0;            // area weight of the area-perimeter tradeoff
  std::string source = "unit";  // poisson-integral: unit | bw1 | bw2
  bool times_area = true;       // eigenvalue: optimize the scale-invariant product
  bool maximize = false;
};

// Reference to an analytic body, used for initial shapes and inclusion bounds.
// kind "none" disables the field, "auto" (initial shape only) delegates to the
// optimizer's deterministic feasible start.
struct ShapeSpec {
  std::string kind = "none";  // none | auto | disk | square | reuleaux
  double radius = 1.0;
  double side = 2.0;
  double width = 1.0;

  bool enabled() const { return kind != "none"; }
  ShapeDescriptor resolve() const;  // throws ValidationError for none/auto
};

struct ConstraintSpec {
  std::string convexity = "rigorous";  // rigorous | fd
  double width_lower = std::numeric_limits<double>::quiet_NaN();
  double width_upper = std::numeric_limits<double>::quiet_NaN();
  double constant_width = std::numeric_limits<double>::quiet_NaN();
  double diameter = std::numeric_limits<double>::quiet_NaN();
  bool symmetry = false;
  ShapeSpec inclusion_outer;  // body contained in this shape
  ShapeSpec inclusion_inner;  // body containing this shape
  double box_lower = std::numeric_limits<double>::quiet_NaN();  // scalar bounds
  double box_upper = std::numeric_limits<double>::quiet_NaN();  // on every entry
};

struct OptimizerSpec {
  double tol_kkt = 1e-6;
  double tol_feas = 1e-9;
  int max_outer = 40;
  int max_inner = 200;
  double perturbation = 0.0;
  double centering = 0.0;
};

struct FemSpec {
  double target_h = 0.0;  // 0: resolved from the body diameter
  int extra_levels = 1;
  bool extrapolate = true;

  FemSettings settings() const { return {target_h, extra_levels, extrapolate}; }
};

struct ProblemDescriptor {
  int schema_version = 1;
  std::string name = "problem";
  std::string parametrization = "support";  // support | gauge | polar-pair
  Index n = 0;
  FunctionalSpec functional;
  ConstraintSpec constraints;
  ShapeSpec initial{.kind = "auto"};
  OptimizerSpec optimizer;
  FemSpec fem;
  std::uint64_t seed = 0;
};

// Structural validation with field-path error messages; every other entry
// point calls this first.
void validate_descriptor(const ProblemDescriptor& d);

// Build the optimizer input: functional by name, constraint rows by family,
// box bounds, initial point, tolerances and caps.
NlpProblem assemble_problem(const ProblemDescriptor& d);

struct RunMetrics {
  double area = 0;
  double perimeter = 0;
  double width_min = 0;
  double width_max = 0;
  double diameter = 0;
  std::vector<double> eigenvalues;  // filled for eigenvalue objectives
};

struct RunResult {
  ProblemDescriptor descriptor;
  SolveReport report;
  Matrix2X vertices;       // final body, counterclockwise
  Matrix2X polar_vertices; // polar-pair runs only (0 columns otherwise)
  RunMetrics metrics;
};

// Widths and diameter measured on the polygon itself so the metrics hold for
// every parametrization.
RunMetrics measure_polygon(const ConvexPolygon& P);

// Assemble, solve, and measure.  Solver failures are reported through the
// SolveReport, not exceptions; validation and infeasibility still throw.
RunResult run_problem(const ProblemDescriptor& d, const IterateObserver& observer = {});

}  // namespace convopt
