#pragma once

#include <functional>
#include <string>

#include "convopt/problems.hpp"
#include "convopt/types.hpp"

namespace convopt::io {

inline constexpr const char* kToolVersion = "convopt 1.0.0";

// JSON text -> descriptor.  Parse errors, unknown fields, wrong types, and
// schema violations all throw ValidationError naming the offending field.
ProblemDescriptor parse_descriptor(const std::string& json_text);

// Canonical serialization (sorted keys, disabled fields omitted); parsing it
// back reproduces the descriptor exactly.
std::string descriptor_json(const ProblemDescriptor& d);

// 64-bit FNV-1a fingerprint of the canonical serialization, as fixed-width hex.
std::string descriptor_hash(const ProblemDescriptor& d);

std::string result_json(const RunResult& r);
RunResult parse_result(const std::string& json_text);

// Two columns x,y, one row per vertex, counterclockwise, no header.
std::string vertices_csv(const Matrix2X& vertices);

// One column, full precision, no header.
std::string column_csv(const Vector& v);

// SVG with a unit-scaled viewBox around the body: shape outline, optional
// second outline (the polar body of a Mahler run), optional scalar heat field
// rasterized behind the shape (the source term of a Poisson run).
struct RenderOptions {
  const Matrix2X* overlay = nullptr;
  std::function<double(const Vector2&)> background;
  int raster = 72;  // background cells across the longer axis
};
std::string render_svg(const Matrix2X& body, const RenderOptions& options = {});

// Whole-file read; throws Error when unreadable.
std::string read_text(const std::string& path);

// Write through a temporary in the same directory plus an atomic rename, so
// failed runs never leave partial files; creates missing parent directories.
void write_text(const std::string& path, const std::string& content);

std::string fnv1a_hex(const std::string& text);

}  // namespace convopt::io
