#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>

#include "convopt/functionals.hpp"
#include "convopt/io.hpp"
#include "convopt/oracle.hpp"
#include "convopt/problems.hpp"
#include "convopt/shapes.hpp"
#include "convopt/support.hpp"

namespace {

using namespace convopt;

constexpr int kOk = 0;
constexpr int kValidationFailure = 2;
constexpr int kSolverFailure = 3;
constexpr int kVerificationFailure = 4;

std::string render_result(const RunResult& r) {
  io::RenderOptions options;
  if (r.polar_vertices.cols() > 0) options.overlay = &r.polar_vertices;
  if (r.descriptor.functional.name == "poisson-integral") {
    const PdeSource source = r.descriptor.functional.source == "bw1"   ? PdeSource::kBW1
                             : r.descriptor.functional.source == "bw2" ? PdeSource::kBW2
                                                                       : PdeSource::kUnit;
    options.background = [source](const Vector2& x) { return pde_source_value(source, x); };
  }
  return io::render_svg(r.vertices, options);
}

int run_solve(const std::string& descriptor_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed) {
  ProblemDescriptor d = io::parse_descriptor(io::read_text(descriptor_path));
  if (seed) d.seed = *seed;
  RunResult result = run_problem(d);
  const std::string base = out_dir + "/" + d.name;
  io::write_text(base + "_result.json", io::result_json(result));
  io::write_text(base + "_vertices.csv", io::vertices_csv(result.vertices));
  io::write_text(base + ".svg", render_result(result));
  std::printf("%s: %s, objective %.9g, area %.6g, perimeter %.6g (results in %s)\n",
              d.name.c_str(), termination_name(result.report.reason).c_str(),
              result.report.objective, result.metrics.area, result.metrics.perimeter,
              out_dir.c_str());
  return result.report.success() ? kOk : kSolverFailure;
}

int run_verify(const std::string& suite, const std::string& out_dir, std::uint64_t seed,
               const std::string& corrupt) {
  oracle::Corruption corruption = oracle::Corruption::kNone;
  if (corrupt == "rigorous-area") corruption = oracle::Corruption::kRigorousArea;
  else if (corrupt == "fd-leading") corruption = oracle::Corruption::kFdLeading;
  else if (corrupt == "gauge-area") corruption = oracle::Corruption::kGaugeArea;
  else if (!corrupt.empty())
    throw ValidationError("--corrupt: expected rigorous-area, fd-leading, or gauge-area");

  std::vector<oracle::SuiteReport> reports;
  if (suite == "identities" || suite == "all")
    reports.push_back(oracle::identity_suite(10000, seed, corruption));
  if (suite == "theorems" || suite == "all") reports.push_back(oracle::theorem_suite(seed));
  if (suite == "gradients" || suite == "all") reports.push_back(oracle::gradient_suite(seed));
  if (reports.empty())
    throw ValidationError("--suite: expected identities, theorems, gradients, or all");

  bool pass = true;
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& report : reports) {
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : report.cases) {
      pass = pass && c.pass;
      std::printf("[%s] %s/%s observed=%.3e threshold=%.3e%s%s\n", c.pass ? "PASS" : "FAIL",
                  report.suite.c_str(), c.name.c_str(), c.observed, c.threshold,
                  c.detail.empty() ? "" : " ", c.detail.c_str());
      cases.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"observed", c.observed},
                       {"threshold", c.threshold},
                       {"detail", c.detail}});
    }
    summary.push_back({{"suite", report.suite}, {"pass", report.pass()}, {"cases", cases}});
  }
  io::write_text(out_dir + "/verify_" + suite + ".json", summary.dump(2) + "\n");
  std::printf("%s\n", pass ? "verification passed" : "verification FAILED");
  return pass ? kOk : kVerificationFailure;
}

int run_sample(const std::string& kind, const std::string& param, Index n,
               const std::string& out_file, double radius, double side, double width) {
  ShapeSpec spec;
  spec.kind = kind;
  spec.radius = radius;
  spec.side = side;
  spec.width = width;
  ShapeDescriptor body = spec.resolve();
  const Vector values = param == "gauge" ? sample_gauge(body, n) : sample_support(body, n);
  const LinearConstraintSet rows =
      param == "gauge" ? gauge_convexity_constraints(n) : convexity_constraints(n);
  io::write_text(out_file, io::column_csv(values));
  std::printf("%s %s samples, n=%ld, worst convexity violation %.3e -> %s\n", kind.c_str(),
              param.c_str(), static_cast<long>(n), rows.max_violation(values), out_file.c_str());
  return kOk;
}

int run_render(const std::string& result_path, const std::string& svg_path) {
  RunResult r = io::parse_result(io::read_text(result_path));
  io::write_text(svg_path, render_result(r));
  std::printf("%s -> %s\n", result_path.c_str(), svg_path.c_str());
  return kOk;
}

int guarded(const std::function<int()>& body, int failure_code) {
  try {
    return body();
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kValidationFailure;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return failure_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return failure_code;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convex shape optimization over support and gauge discretizations"};
  app.require_subcommand(1);

  std::string descriptor_path, out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  CLI::App* solve_cmd = app.add_subcommand("solve", "run a problem descriptor");
  solve_cmd->add_option("descriptor", descriptor_path, "problem descriptor JSON")->required();
  solve_cmd->add_option("--out", out_dir, "output directory");
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt = solve_cmd->add_option("--seed", seed_value, "override the descriptor seed");

  std::string suite = "all", verify_out = ".", corrupt;
  std::uint64_t verify_seed = 2024;
  CLI::App* verify_cmd = app.add_subcommand("verify", "run the verification suites");
  verify_cmd->add_option("--suite", suite, "identities | theorems | gradients | all");
  verify_cmd->add_option("--out", verify_out, "report directory");
  verify_cmd->add_option("--seed", verify_seed, "random draw seed");
  verify_cmd->add_option("--corrupt", corrupt,
                         "deliberately corrupt one identity (harness hook): "
                         "rigorous-area | fd-leading | gauge-area");

  std::string shape_kind = "disk", param = "support", sample_out = "samples.csv";
  Index sample_n = 64;
  double radius = 1.0, side = 2.0, width = 1.0;
  CLI::App* sample_cmd = app.add_subcommand("sample", "sample an analytic body on the grid");
  sample_cmd->add_option("--shape", shape_kind, "disk | square | reuleaux");
  sample_cmd->add_option("--param", param, "support | gauge");
  sample_cmd->add_option("-n", sample_n, "grid size");
  sample_cmd->add_option("--out", sample_out, "output CSV");
  sample_cmd->add_option("--radius", radius, "disk radius");
  sample_cmd->add_option("--side", side, "square side");
  sample_cmd->add_option("--width", width, "reuleaux width");

  std::string result_path, svg_path = "shape.svg";
  CLI::App* render_cmd = app.add_subcommand("render", "re-render a persisted result");
  render_cmd->add_option("result", result_path, "result JSON path")->required();
  render_cmd->add_option("--svg", svg_path, "output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationFailure;
  }

  if (app.got_subcommand(solve_cmd))
    return guarded(
        [&] {
          if (*seed_opt) seed_override = seed_value;
          return run_solve(descriptor_path, out_dir, seed_override);
        },
        kSolverFailure);
  if (app.got_subcommand(verify_cmd))
    return guarded([&] { return run_verify(suite, verify_out, verify_seed, corrupt); },
                   kVerificationFailure);
  if (app.got_subcommand(sample_cmd))
    return guarded(
        [&] { return run_sample(shape_kind, param, sample_n, sample_out, radius, side, width); },
        kValidationFailure);
  return guarded([&] { return run_render(result_path, svg_path); }, kValidationFailure);
}
