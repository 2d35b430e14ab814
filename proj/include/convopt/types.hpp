#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace convopt {

using Index = Eigen::Index;
using Scalar = double;
using Vector = Eigen::VectorXd;
using Vector2 = Eigen::Vector2d;
using Matrix = Eigen::MatrixXd;
using Matrix2X = Eigen::Matrix2Xd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Tolerance used when validating feasibility of parameter vectors.  Scaled by
// the magnitude of the data so that dilated shapes are judged consistently.
inline double feasibility_tolerance(const Vector& p) {
  return 1e-9 * std::max(1.0, p.cwiseAbs().maxCoeff());
}

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameter vector violates a convexity/feasibility requirement.  Carries the
// indices of the offending rows so callers can report them.
struct InfeasibleParameters : Error {
  InfeasibleParameters(const std::string& what, std::vector<Index> bad)
      : Error(what), indices(std::move(bad)) {}
  std::vector<Index> indices;
};

// Input that fails structural validation (malformed descriptor, bad sizes,
// non-convex polygon data, ...).
struct ValidationError : Error {
  using Error::Error;
};

// Angle grid step for n uniformly spaced directions.
inline double grid_step(Index n) { return kTwoPi / static_cast<double>(n); }

// Wrap an angle into [0, 2*pi).
inline double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  return t < 0 ? t + kTwoPi : t;
}

// Signed angular difference wrapped into [-pi, pi).
inline double wrap_signed(double theta) {
  double t = std::fmod(theta + kPi, kTwoPi);
  if (t < 0) t += kTwoPi;
  return t - kPi;
}

inline Index mod_index(Index i, Index n) {
  Index m = i % n;
  return m < 0 ? m + n : m;
}

// Unit direction and its counterclockwise normal.
inline Vector2 radial(double theta) { return {std::cos(theta), std::sin(theta)}; }
inline Vector2 tangential(double theta) { return {-std::sin(theta), std::cos(theta)}; }

inline double cross2(const Vector2& a, const Vector2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace convopt
