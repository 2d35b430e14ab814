#include "convopt/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "convopt/geometry.hpp"

namespace convopt::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

std::string join_path(const std::string& base, const char* key) {
  return base.empty() ? key : base + "." + key;
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path.empty() ? "descriptor" : path, "expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    if (!known) fail(join_path(path, item.key().c_str()), "unknown field");
  }
}

template <typename T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(join_path(path, key), "wrong type");
  }
}

double get_number(const json& j, const std::string& path, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(join_path(path, key), "expected a number");
  return j.at(key).get<double>();
}

ShapeSpec shape_from_json(const json& j, const std::string& path, const char* fallback_kind) {
  ShapeSpec s;
  s.kind = fallback_kind;
  if (j.is_null()) return s;
  check_keys(j, path, {"kind", "radius", "side", "width"});
  s.kind = get_or<std::string>(j, path, "kind", fallback_kind);
  s.radius = get_number(j, path, "radius", s.radius);
  s.side = get_number(j, path, "side", s.side);
  s.width = get_number(j, path, "width", s.width);
  return s;
}

json shape_to_json(const ShapeSpec& s) {
  json j;
  j["kind"] = s.kind;
  if (s.kind == "disk") j["radius"] = s.radius;
  if (s.kind == "square") j["side"] = s.side;
  if (s.kind == "reuleaux") j["width"] = s.width;
  return j;
}

ProblemDescriptor descriptor_from_json(const json& j) {
  check_keys(j, "", {"schema_version", "name", "parametrization", "n", "functional",
                     "constraints", "initial", "optimizer", "fem", "seed"});
  ProblemDescriptor d;
  d.schema_version = get_or<int>(j, "", "schema_version", 0);
  d.name = get_or<std::string>(j, "", "name", "");
  d.parametrization = get_or<std::string>(j, "", "parametrization", "support");
  d.n = get_or<Index>(j, "", "n", 0);
  d.seed = get_or<std::uint64_t>(j, "", "seed", 0);

  if (j.contains("functional")) {
    const json& f = j.at("functional");
    check_keys(f, "functional", {"name", "k", "mu", "source", "times_area", "maximize"});
    d.functional.name = get_or<std::string>(f, "functional", "name", d.functional.name);
    d.functional.k = get_or<int>(f, "functional", "k", d.functional.k);
    d.functional.mu = get_number(f, "functional", "mu", d.functional.mu);
    d.functional.source = get_or<std::string>(f, "functional", "source", d.functional.source);
    d.functional.times_area = get_or<bool>(f, "functional", "times_area", d.functional.times_area);
    d.functional.maximize = get_or<bool>(f, "functional", "maximize", d.functional.maximize);
  }

  if (j.contains("constraints")) {
    const json& c = j.at("constraints");
    check_keys(c, "constraints",
               {"convexity", "width_lower", "width_upper", "constant_width", "diameter",
                "symmetry", "inclusion_outer", "inclusion_inner", "box_lower", "box_upper"});
    ConstraintSpec& out = d.constraints;
    out.convexity = get_or<std::string>(c, "constraints", "convexity", out.convexity);
    out.width_lower = get_number(c, "constraints", "width_lower", out.width_lower);
    out.width_upper = get_number(c, "constraints", "width_upper", out.width_upper);
    out.constant_width = get_number(c, "constraints", "constant_width", out.constant_width);
    out.diameter = get_number(c, "constraints", "diameter", out.diameter);
    out.symmetry = get_or<bool>(c, "constraints", "symmetry", out.symmetry);
    if (c.contains("inclusion_outer"))
      out.inclusion_outer = shape_from_json(c.at("inclusion_outer"), "constraints.inclusion_outer", "none");
    if (c.contains("inclusion_inner"))
      out.inclusion_inner = shape_from_json(c.at("inclusion_inner"), "constraints.inclusion_inner", "none");
    out.box_lower = get_number(c, "constraints", "box_lower", out.box_lower);
    out.box_upper = get_number(c, "constraints", "box_upper", out.box_upper);
  }

  if (j.contains("initial")) d.initial = shape_from_json(j.at("initial"), "initial", "auto");

  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    check_keys(o, "optimizer", {"tol_kkt", "tol_feas", "max_outer", "max_inner",
                                "perturbation", "centering"});
    OptimizerSpec& out = d.optimizer;
    out.tol_kkt = get_number(o, "optimizer", "tol_kkt", out.tol_kkt);
    out.tol_feas = get_number(o, "optimizer", "tol_feas", out.tol_feas);
    out.max_outer = get_or<int>(o, "optimizer", "max_outer", out.max_outer);
    out.max_inner = get_or<int>(o, "optimizer", "max_inner", out.max_inner);
    out.perturbation = get_number(o, "optimizer", "perturbation", out.perturbation);
    out.centering = get_number(o, "optimizer", "centering", out.centering);
  }

  if (j.contains("fem")) {
    const json& m = j.at("fem");
    check_keys(m, "fem", {"target_h", "extra_levels", "extrapolate"});
    d.fem.target_h = get_number(m, "fem", "target_h", d.fem.target_h);
    d.fem.extra_levels = get_or<int>(m, "fem", "extra_levels", d.fem.extra_levels);
    d.fem.extrapolate = get_or<bool>(m, "fem", "extrapolate", d.fem.extrapolate);
  }

  validate_descriptor(d);
  return d;
}

json descriptor_to_json(const ProblemDescriptor& d) {
  json j;
  j["schema_version"] = d.schema_version;
  j["name"] = d.name;
  j["parametrization"] = d.parametrization;
  j["n"] = d.n;
  j["seed"] = d.seed;

  json f;
  f["name"] = d.functional.name;
  if (d.functional.name == "eigenvalue") {
    f["k"] = d.functional.k;
    f["times_area"] = d.functional.times_area;
    if (d.functional.maximize) f["maximize"] = true;
  }
  if (d.functional.name == "area-perimeter") f["mu"] = d.functional.mu;
  if (d.functional.name == "poisson-integral") f["source"] = d.functional.source;
  j["functional"] = f;

  const ConstraintSpec& c = d.constraints;
  json jc;
  jc["convexity"] = c.convexity;
  if (std::isfinite(c.width_lower)) jc["width_lower"] = c.width_lower;
  if (std::isfinite(c.width_upper)) jc["width_upper"] = c.width_upper;
  if (std::isfinite(c.constant_width)) jc["constant_width"] = c.constant_width;
  if (std::isfinite(c.diameter)) jc["diameter"] = c.diameter;
  if (c.symmetry) jc["symmetry"] = true;
  if (c.inclusion_outer.enabled()) jc["inclusion_outer"] = shape_to_json(c.inclusion_outer);
  if (c.inclusion_inner.enabled()) jc["inclusion_inner"] = shape_to_json(c.inclusion_inner);
  if (std::isfinite(c.box_lower)) jc["box_lower"] = c.box_lower;
  if (std::isfinite(c.box_upper)) jc["box_upper"] = c.box_upper;
  j["constraints"] = jc;

  j["initial"] = shape_to_json(d.initial);

  json o;
  o["tol_kkt"] = d.optimizer.tol_kkt;
  o["tol_feas"] = d.optimizer.tol_feas;
  o["max_outer"] = d.optimizer.max_outer;
  o["max_inner"] = d.optimizer.max_inner;
  o["perturbation"] = d.optimizer.perturbation;
  o["centering"] = d.optimizer.centering;
  j["optimizer"] = o;

  if (d.functional.name == "eigenvalue" || d.functional.name == "poisson-integral") {
    json m;
    m["target_h"] = d.fem.target_h;
    m["extra_levels"] = d.fem.extra_levels;
    m["extrapolate"] = d.fem.extrapolate;
    j["fem"] = m;
  }
  return j;
}

json matrix_to_json(const Matrix2X& m) {
  json rows = json::array();
  for (Index i = 0; i < m.cols(); ++i) rows.push_back({m(0, i), m(1, i)});
  return rows;
}

Matrix2X matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of [x, y] pairs");
  Matrix2X m(2, static_cast<Index>(j.size()));
  Index col = 0;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 2) fail(path, "expected an array of [x, y] pairs");
    m(0, col) = row.at(0).get<double>();
    m(1, col) = row.at(1).get<double>();
    ++col;
  }
  return m;
}

json parse_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

ProblemDescriptor parse_descriptor(const std::string& json_text) {
  return descriptor_from_json(parse_text(json_text, "descriptor"));
}

std::string descriptor_json(const ProblemDescriptor& d) {
  validate_descriptor(d);
  return descriptor_to_json(d).dump(2) + "\n";
}

std::string descriptor_hash(const ProblemDescriptor& d) {
  return fnv1a_hex(descriptor_to_json(d).dump());
}

std::string result_json(const RunResult& r) {
  json j;
  j["schema_version"] = 1;
  j["descriptor"] = descriptor_to_json(r.descriptor);
  j["provenance"] = {{"descriptor_hash", descriptor_hash(r.descriptor)},
                     {"seed", r.descriptor.seed},
                     {"version", kToolVersion}};
  j["solve"] = {{"success", r.report.success()},
                {"reason", termination_name(r.report.reason)},
                {"objective", r.report.objective},
                {"stationarity", r.report.stationarity},
                {"violation", r.report.violation},
                {"iterations", r.report.iterations},
                {"evaluations", r.report.evaluations}};
  j["point"] = std::vector<double>(r.report.point.data(),
                                   r.report.point.data() + r.report.point.size());
  j["vertices"] = matrix_to_json(r.vertices);
  if (r.polar_vertices.cols() > 0) j["polar_vertices"] = matrix_to_json(r.polar_vertices);
  json metrics;
  metrics["area"] = r.metrics.area;
  metrics["perimeter"] = r.metrics.perimeter;
  metrics["width_min"] = r.metrics.width_min;
  metrics["width_max"] = r.metrics.width_max;
  metrics["diameter"] = r.metrics.diameter;
  if (!r.metrics.eigenvalues.empty()) metrics["eigenvalues"] = r.metrics.eigenvalues;
  j["metrics"] = metrics;
  return j.dump(2) + "\n";
}

RunResult parse_result(const std::string& json_text) {
  json j = parse_text(json_text, "result");
  check_keys(j, "result", {"schema_version", "descriptor", "provenance", "solve", "point",
                           "vertices", "polar_vertices", "metrics"});
  if (get_or<int>(j, "result", "schema_version", 0) != 1) fail("result.schema_version", "expected 1");
  if (!j.contains("descriptor")) fail("result.descriptor", "missing");
  RunResult r;
  r.descriptor = descriptor_from_json(j.at("descriptor"));

  if (j.contains("solve")) {
    const json& s = j.at("solve");
    const std::string reason = get_or<std::string>(s, "result.solve", "reason", "iteration-limit");
    if (reason == "converged") r.report.reason = TerminationReason::kConverged;
    else if (reason == "line-search-failure") r.report.reason = TerminationReason::kLineSearchFailure;
    else r.report.reason = TerminationReason::kIterationLimit;
    r.report.objective = get_number(s, "result.solve", "objective", 0.0);
    r.report.stationarity = get_number(s, "result.solve", "stationarity", 0.0);
    r.report.violation = get_number(s, "result.solve", "violation", 0.0);
    r.report.iterations = get_or<int>(s, "result.solve", "iterations", 0);
    r.report.evaluations = get_or<int>(s, "result.solve", "evaluations", 0);
  }

  if (j.contains("point")) {
    auto values = j.at("point").get<std::vector<double>>();
    r.report.point = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
  }
  if (!j.contains("vertices")) fail("result.vertices", "missing");
  r.vertices = matrix_from_json(j.at("vertices"), "result.vertices");
  if (j.contains("polar_vertices"))
    r.polar_vertices = matrix_from_json(j.at("polar_vertices"), "result.polar_vertices");

  if (j.contains("metrics")) {
    const json& m = j.at("metrics");
    r.metrics.area = get_number(m, "result.metrics", "area", 0.0);
    r.metrics.perimeter = get_number(m, "result.metrics", "perimeter", 0.0);
    r.metrics.width_min = get_number(m, "result.metrics", "width_min", 0.0);
    r.metrics.width_max = get_number(m, "result.metrics", "width_max", 0.0);
    r.metrics.diameter = get_number(m, "result.metrics", "diameter", 0.0);
    if (m.contains("eigenvalues"))
      r.metrics.eigenvalues = m.at("eigenvalues").get<std::vector<double>>();
  }
  return r;
}

std::string vertices_csv(const Matrix2X& vertices) {
  std::string out;
  char line[80];
  for (Index i = 0; i < vertices.cols(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", vertices(0, i), vertices(1, i));
    out += line;
  }
  return out;
}

std::string column_csv(const Vector& v) {
  std::string out;
  char line[40];
  for (Index i = 0; i < v.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g\n", v[i]);
    out += line;
  }
  return out;
}

namespace {

// Point-in-polygon for the rasterized background: all cross products with the
// counterclockwise edges nonnegative.
bool inside(const Matrix2X& poly, const Vector2& x) {
  const Index n = poly.cols();
  for (Index i = 0; i < n; ++i) {
    const Vector2 a = poly.col(i);
    const Vector2 b = poly.col((i + 1) % n);
    if (cross2(Vector2(b - a), Vector2(x - a)) < 0) return false;
  }
  return true;
}

void append_path(std::string& svg, const Matrix2X& poly, const char* style) {
  svg += "  <path d=\"";
  char buf[64];
  for (Index i = 0; i < poly.cols(); ++i) {
    std::snprintf(buf, sizeof buf, "%c%.6g %.6g ", i == 0 ? 'M' : 'L', poly(0, i), -poly(1, i));
    svg += buf;
  }
  svg += "Z\" ";
  svg += style;
  svg += "/>\n";
}

}  // namespace

std::string render_svg(const Matrix2X& body, const RenderOptions& options) {
  if (body.cols() < 3) throw ValidationError("render needs at least 3 vertices");
  double xmin = body.row(0).minCoeff(), xmax = body.row(0).maxCoeff();
  double ymin = body.row(1).minCoeff(), ymax = body.row(1).maxCoeff();
  if (options.overlay && options.overlay->cols() > 0) {
    xmin = std::min(xmin, options.overlay->row(0).minCoeff());
    xmax = std::max(xmax, options.overlay->row(0).maxCoeff());
    ymin = std::min(ymin, options.overlay->row(1).minCoeff());
    ymax = std::max(ymax, options.overlay->row(1).maxCoeff());
  }
  const double pad = 0.05 * std::max(xmax - xmin, ymax - ymin);
  xmin -= pad;
  xmax += pad;
  ymin -= pad;
  ymax += pad;
  const double width = xmax - xmin, height = ymax - ymin;

  char buf[256];
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" ";
  // The y axis is negated in every path/rect so the math orientation survives
  // SVG's downward y.
  std::snprintf(buf, sizeof buf, "viewBox=\"%.6g %.6g %.6g %.6g\" width=\"480\" height=\"%d\">\n",
                xmin, -ymax, width, height, static_cast<int>(480 * height / width));
  svg += buf;

  const double stroke = 0.006 * std::max(width, height);

  if (options.background) {
    const int cells = std::max(8, options.raster);
    const double step = std::max(width, height) / cells;
    double peak = 0;
    for (double y = ymin + step / 2; y < ymax; y += step)
      for (double x = xmin + step / 2; x < xmax; x += step)
        if (inside(body, {x, y})) peak = std::max(peak, std::abs(options.background({x, y})));
    if (peak <= 0) peak = 1;
    for (double y = ymin + step / 2; y < ymax; y += step)
      for (double x = xmin + step / 2; x < xmax; x += step) {
        if (!inside(body, {x, y})) continue;
        const double t = std::clamp(options.background({x, y}) / peak, -1.0, 1.0);
        // Diverging map: negative blue, zero white, positive red.
        const int r = static_cast<int>(255 * (t >= 0 ? 1.0 : 1.0 + t));
        const int g = static_cast<int>(255 * (1.0 - std::abs(t)));
        const int b = static_cast<int>(255 * (t <= 0 ? 1.0 : 1.0 - t));
        std::snprintf(buf, sizeof buf,
                      "  <rect x=\"%.6g\" y=\"%.6g\" width=\"%.6g\" height=\"%.6g\" "
                      "fill=\"rgb(%d,%d,%d)\"/>\n",
                      x - step / 2, -(y + step / 2), step, step, r, g, b);
        svg += buf;
      }
  }

  std::string body_style = "fill=\"" +
                           std::string(options.background ? "none" : "#dbe4f0") +
                           "\" stroke=\"#1a1a1a\" stroke-width=\"" + std::to_string(stroke) + "\"";
  append_path(svg, body, body_style.c_str());

  if (options.overlay && options.overlay->cols() > 0) {
    std::string overlay_style = "fill=\"none\" stroke=\"#c43c3c\" stroke-width=\"" +
                                std::to_string(stroke) + "\" stroke-dasharray=\"" +
                                std::to_string(4 * stroke) + "\"";
    append_path(svg, *options.overlay, overlay_style.c_str());
  }

  svg += "</svg>\n";
  return svg;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path temp = target;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + temp.string() + "'");
    out << content;
    if (!out.flush()) throw Error("short write to '" + temp.string() + "'");
  }
  fs::rename(temp, target);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(hash));
  return out;
}

}  // namespace convopt::io
