#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "convopt/support.hpp"
#include "convopt/types.hpp"

// Independent checks: closed-form identities evaluated against direct
// cross-product geometry, finite-difference gradients, and the approximation
// theorems.  Everything here deliberately avoids the code paths it verifies.
namespace convopt::oracle {

// Deliberate corruptions injectable through the verify command, used to prove
// the checks can fail and name the broken identity.
enum class Corruption { kNone, kRigorousArea, kFdLeading, kGaugeArea };

struct IdentitySample {
  double exact = 0;      // cross-product triangle area
  double predicted = 0;  // closed-form value (or leading term)
  double scale = 1;      // natural magnitude of the computation
  double residual() const { return exact - predicted; }
};

// Reconstruct five consecutive support samples from prescribed trigonometric
// curvature radii (rho1, rho2, rho3) plus free values p1, p3, build the three
// middle vertices at base rotation t, and compare the cross-product area with
// the closed form.  Valid for negative radii as well: the identity is exact.
IdentitySample rigorous_area_identity(double rho1, double rho2, double rho3, double p1,
                                      double p3, double t, double h,
                                      Corruption corrupt = Corruption::kNone);

// Same reconstruction for the finite-difference scheme; `predicted` is the
// h^3 leading term, so the residual is O(h^5) rather than zero.
IdentitySample fd_area_expansion(double rho1, double rho2, double rho3, double p1,
                                 double p3, double t, double h,
                                 Corruption corrupt = Corruption::kNone);

// Gauge-side identity for radial vertices (1/gamma_i) r(t + (i-2) h).
IdentitySample gauge_area_identity(double g1, double g2, double g3, double t, double h,
                                   Corruption corrupt = Corruption::kNone);

// Central finite differences with per-component step scaled by |x_i|.
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                   double relative_step = 1e-6);

// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Uniformly random support vector satisfying the rigorous convexity rows,
// produced in curvature-radius space: draw nonnegative radii, project onto
// the attainable (translation-orthogonal) subspace, lift so the minimum is an
// exact zero, and solve back for the support samples.  Probes the constraint
// boundary by construction.
SupportVector random_feasible_support(Index n, std::mt19937_64& rng);

// Deterministic vector that satisfies every finite-difference convexity row
// yet yields a non-convex polygon under the finite-difference construction.
// Throws if the internal postconditions ever fail.
SupportVector fd_convexity_counterexample(Index n = 128);

struct CheckResult {
  std::string name;
  bool pass = false;
  double observed = 0;
  double threshold = 0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> cases;
  bool pass() const {
    for (const auto& c : cases)
      if (!c.pass) return false;
    return true;
  }
};

// Closed-form area identities on random draws (including negative radii and
// arbitrary rotations) plus the O(h^5) slope of the fd expansion.
SuiteReport identity_suite(int draws = 10000, std::uint64_t seed = 2024,
                           Corruption corrupt = Corruption::kNone);

// Approximation theorem, geometric lemma and sampled-feasibility checks.
SuiteReport theorem_suite(std::uint64_t seed = 2024);

// Gradient cross-checks of the shape functionals against finite differences
// (implemented alongside the functionals).
SuiteReport gradient_suite(std::uint64_t seed = 2024);

}  // namespace convopt::oracle
