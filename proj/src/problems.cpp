#include "convopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "convopt/fem.hpp"
#include "convopt/gauge.hpp"
#include "convopt/support.hpp"

namespace convopt {

namespace {

bool given(double v) { return std::isfinite(v); }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

void validate_shape(const ShapeSpec& s, const std::string& path, bool allow_auto) {
  static const std::set<std::string> kinds = {"none", "auto", "disk", "square", "reuleaux"};
  if (!kinds.count(s.kind)) fail(path + ".kind", "unknown shape '" + s.kind + "'");
  if (s.kind == "auto" && !allow_auto) fail(path + ".kind", "'auto' is only valid as an initial shape");
  if (s.kind == "disk" && !(s.radius > 0)) fail(path + ".radius", "must be positive");
  if (s.kind == "square" && !(s.side > 0)) fail(path + ".side", "must be positive");
  if (s.kind == "reuleaux" && !(s.width > 0)) fail(path + ".width", "must be positive");
}

bool needs_pairs(const ConstraintSpec& c) {
  return given(c.width_lower) || given(c.width_upper) || given(c.constant_width) ||
         given(c.diameter) || c.symmetry;
}

}  // namespace

ShapeDescriptor ShapeSpec::resolve() const {
  if (kind == "disk") return ShapeDescriptor::disk(radius);
  if (kind == "square") return ShapeDescriptor::square(side);
  if (kind == "reuleaux") return ShapeDescriptor::reuleaux(width);
  throw ValidationError("shape '" + kind + "' does not name a body");
}

void validate_descriptor(const ProblemDescriptor& d) {
  if (d.schema_version != 1) fail("schema_version", "expected 1");
  if (d.name.empty()) fail("name", "must be non-empty");

  const bool support = d.parametrization == "support";
  const bool gauge = d.parametrization == "gauge";
  const bool polar = d.parametrization == "polar-pair";
  if (!support && !gauge && !polar)
    fail("parametrization", "expected support, gauge, or polar-pair");

  if (d.n < 6) fail("n", "need at least 6 grid directions");
  if (needs_pairs(d.constraints) && d.n % 2 != 0)
    fail("n", "width, diameter, and symmetry rows pair antipodal directions; n must be even");

  const FunctionalSpec& f = d.functional;
  static const std::set<std::string> names = {"area",   "perimeter",  "area-perimeter",
                                              "mahler", "eigenvalue", "poisson-integral"};
  if (!names.count(f.name)) fail("functional.name", "unknown functional '" + f.name + "'");
  if ((f.name == "mahler") != polar)
    fail("parametrization", "the polar-pair parametrization and the mahler objective require each other");
  if (gauge && f.name != "eigenvalue")
    fail("functional.name", "the gauge parametrization supports eigenvalue objectives only");
  if (f.name == "eigenvalue" && f.k < 1) fail("functional.k", "eigenvalue index starts at 1");
  if (f.name == "area-perimeter" && !(f.mu > 0)) fail("functional.mu", "must be positive");
  if (f.name == "poisson-integral" && f.source != "unit" && f.source != "bw1" && f.source != "bw2")
    fail("functional.source", "expected unit, bw1, or bw2");
  if (f.maximize && f.name != "eigenvalue")
    fail("functional.maximize", "only eigenvalue objectives support maximization");

  const ConstraintSpec& c = d.constraints;
  if (c.convexity != "rigorous" && c.convexity != "fd")
    fail("constraints.convexity", "expected rigorous or fd");
  if (c.convexity == "fd" && !support)
    fail("constraints.convexity", "the fd rows exist for the support parametrization only");
  if (!support &&
      (given(c.width_lower) || given(c.width_upper) || given(c.constant_width) || given(c.diameter)))
    fail("constraints", "width and diameter rows act on support values; use the support parametrization");
  for (const double* v : {&c.width_lower, &c.width_upper, &c.constant_width, &c.diameter})
    if (given(*v) && !(*v > 0)) fail("constraints", "width and diameter values must be positive");
  if (given(c.constant_width) && (given(c.width_lower) || given(c.width_upper)))
    fail("constraints.constant_width", "constant width already fixes every pair width");
  validate_shape(c.inclusion_outer, "constraints.inclusion_outer", false);
  validate_shape(c.inclusion_inner, "constraints.inclusion_inner", false);
  if (given(c.box_lower) && given(c.box_upper) && !(c.box_lower < c.box_upper))
    fail("constraints.box_lower", "must stay below box_upper");

  if (d.initial.kind == "none") fail("initial.kind", "expected auto or a shape");
  validate_shape(d.initial, "initial", true);

  const OptimizerSpec& o = d.optimizer;
  if (!(o.tol_kkt > 0)) fail("optimizer.tol_kkt", "must be positive");
  if (!(o.tol_feas > 0)) fail("optimizer.tol_feas", "must be positive");
  if (o.max_outer < 1) fail("optimizer.max_outer", "must be at least 1");
  if (o.max_inner < 1) fail("optimizer.max_inner", "must be at least 1");
  if (o.perturbation < 0) fail("optimizer.perturbation", "must be nonnegative");
  if (o.centering < 0) fail("optimizer.centering", "must be nonnegative");

  if (d.fem.target_h < 0) fail("fem.target_h", "must be nonnegative (0 picks diameter/40)");
  if (d.fem.extra_levels < 0) fail("fem.extra_levels", "must be nonnegative");
  if (d.fem.extrapolate && d.fem.extra_levels < 1)
    fail("fem.extra_levels", "extrapolation needs at least one refinement level");
}

NlpProblem assemble_problem(const ProblemDescriptor& d) {
  validate_descriptor(d);
  const Index n = d.n;
  const bool support = d.parametrization == "support";
  const FunctionalSpec& f = d.functional;

  NlpProblem problem;
  if (f.name == "area") {
    problem.objective = make_area_functional(n);
  } else if (f.name == "perimeter") {
    problem.objective = make_perimeter_functional(n);
  } else if (f.name == "area-perimeter") {
    problem.objective = make_area_perimeter_tradeoff(n, f.mu);
  } else if (f.name == "mahler") {
    problem.objective = make_mahler_functional(n);
  } else if (f.name == "eigenvalue") {
    problem.objective = make_eigenvalue_functional(
        n, f.k,
        f.times_area ? EigenvalueNormalization::kTimesArea : EigenvalueNormalization::kRaw,
        support ? Parametrization::kSupport : Parametrization::kGauge, d.fem.settings(),
        f.maximize);
  } else {
    PdeSource source = f.source == "bw1"   ? PdeSource::kBW1
                       : f.source == "bw2" ? PdeSource::kBW2
                                           : PdeSource::kUnit;
    problem.objective = make_pde_integral_functional(n, source, d.fem.settings());
  }

  const ConstraintSpec& c = d.constraints;
  LinearConstraintSet rows =
      support ? convexity_constraints(n, c.convexity == "fd" ? ConvexityMode::kFiniteDifference
                                                             : ConvexityMode::kRigorous)
              : gauge_convexity_constraints(n);
  if (given(c.width_lower) || given(c.width_upper))
    rows.merge(width_constraints(n, c.width_lower, c.width_upper));
  if (given(c.constant_width)) rows.merge(constant_width_constraints(n, c.constant_width));
  if (given(c.diameter)) rows.merge(diameter_constraints(n, c.diameter));
  if (c.symmetry) rows.merge(symmetry_constraints(n));
  if (c.inclusion_outer.enabled()) {
    ShapeDescriptor outer = c.inclusion_outer.resolve();
    rows.merge(support ? inclusion_constraints(sample_support(outer, n))
                       : gauge_inclusion_constraints(outer, n));
  }
  if (c.inclusion_inner.enabled()) {
    ShapeDescriptor inner = c.inclusion_inner.resolve();
    rows.merge(support ? inclusion_lower_constraints(sample_support(inner, n))
                       : gauge_inclusion_lower_constraints(inner, n));
  }
  problem.constraints = std::move(rows);

  if (given(c.box_lower)) problem.lower = Vector::Constant(n, c.box_lower);
  if (given(c.box_upper)) problem.upper = Vector::Constant(n, c.box_upper);

  if (d.initial.kind != "auto") {
    ShapeDescriptor start = d.initial.resolve();
    problem.start = support ? sample_support(start, n) : sample_gauge(start, n);
  }

  problem.tol_kkt = d.optimizer.tol_kkt;
  problem.tol_feas = d.optimizer.tol_feas;
  problem.max_outer = d.optimizer.max_outer;
  problem.max_inner = d.optimizer.max_inner;
  problem.perturbation = d.optimizer.perturbation;
  problem.centering = d.optimizer.centering;
  problem.seed = d.seed;
  return problem;
}

RunMetrics measure_polygon(const ConvexPolygon& P) {
  RunMetrics m;
  m.area = polygon_area(P);
  m.perimeter = polygon_perimeter(P);
  m.diameter = polygon_diameter(P);
  // Widths sampled on a fine half-turn grid (the width function has period pi).
  const int samples = 720;
  m.width_min = std::numeric_limits<double>::infinity();
  m.width_max = 0;
  for (int j = 0; j < samples; ++j) {
    const double theta = kPi * j / samples;
    const double w = polygon_support(P, theta) + polygon_support(P, theta + kPi);
    m.width_min = std::min(m.width_min, w);
    m.width_max = std::max(m.width_max, w);
  }
  return m;
}

namespace {

// Eigenvalues reported with the same mesh-resolution rule the objective used.
std::vector<double> final_eigenvalues(const ConvexPolygon& body, int count, const FemSpec& fem) {
  double target_h = fem.target_h > 0 ? fem.target_h : polygon_diameter(body) / 40.0;
  fem::Mesh mesh = fem::mesh_polygon(body, target_h);
  for (int level = 0; level + 1 < fem.extra_levels; ++level) mesh = fem::refine(mesh);
  auto coarse = fem::eigs(mesh, count);
  std::vector<double> values(static_cast<size_t>(count));
  if (fem.extra_levels >= 1) {
    auto fine = fem::eigs(fem::refine(mesh), count);
    for (int i = 0; i < count; ++i)
      values[static_cast<size_t>(i)] =
          fem.extrapolate ? fem::extrapolate(coarse[static_cast<size_t>(i)].first,
                                             fine[static_cast<size_t>(i)].first)
                          : fine[static_cast<size_t>(i)].first;
  } else {
    for (int i = 0; i < count; ++i) values[static_cast<size_t>(i)] = coarse[static_cast<size_t>(i)].first;
  }
  return values;
}

}  // namespace

RunResult run_problem(const ProblemDescriptor& d, const IterateObserver& observer) {
  NlpProblem problem = assemble_problem(d);
  RunResult out;
  out.descriptor = d;
  out.report = solve(problem, observer);

  const bool support = d.parametrization == "support";
  ConvexPolygon body = support ? support_polygon(out.report.point) : gauge_polygon(out.report.point);
  out.vertices = body.vertices;
  if (d.parametrization == "polar-pair")
    out.polar_vertices = polar_pair(out.report.point).second.vertices;

  out.metrics = measure_polygon(body);
  if (d.functional.name == "eigenvalue")
    out.metrics.eigenvalues = final_eigenvalues(body, d.functional.k, d.fem);
  return out;
}

}  // namespace convopt
