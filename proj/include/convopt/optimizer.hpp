#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "convopt/constraints.hpp"
#include "convopt/functionals.hpp"
#include "convopt/types.hpp"

namespace convopt {

// Minimize a Functional subject to sparse linear inequalities a.x >= lb,
// linear equalities, and box bounds.  A primal log-barrier interior-point
// scheme with a BFGS inner loop keeps every accepted iterate strictly inside
// the inequalities, so with the rigorous convexity rows every intermediate
// shape is convex.  Equalities are eliminated through an orthonormal
// null-space basis; the barrier parameter shrinks geometrically (x0.2) per
// outer stage.
struct NlpProblem {
  Functional objective;
  LinearConstraintSet constraints;
  Vector lower;  // box bounds, empty or NaN entries disable a side
  Vector upper;
  Vector start;  // empty: initialize() builds the feasible disk start

  double tol_kkt = 1e-6;   // 1e-4 is the sensible choice for FEM objectives
  double tol_feas = 1e-9;
  int max_outer = 40;      // barrier stages
  int max_inner = 200;     // BFGS steps per stage

  std::uint64_t seed = 0;       // start-perturbation stream
  double perturbation = 0.0;    // relative size of the seeded start offset
  double centering = 0.0;       // weight of the sum(q_i^2) translation pin
};

enum class TerminationReason { kConverged, kIterationLimit, kLineSearchFailure };

std::string termination_name(TerminationReason reason);

struct SolveReport {
  Vector point;
  double objective = 0;      // in the problem's original orientation
  double stationarity = 0;   // projected KKT residual, complementarity included
  double violation = 0;      // worst constraint violation at the final point
  int iterations = 0;        // accepted inner steps across all stages
  int evaluations = 0;       // objective callback invocations
  TerminationReason reason = TerminationReason::kIterationLimit;

  bool success() const { return reason == TerminationReason::kConverged; }
};

// Called on every accepted iterate with the full-space point and the
// objective value in the problem's original orientation.
using IterateObserver = std::function<void(const Vector&, double)>;

// Strictly feasible start: the round body p = c (support) or gamma = c
// (gauge) with c chosen inside every constraint interval, plus an optional
// seeded perturbation projected onto the equality null space and backtracked
// toward the round body until strictly feasible.  A provided problem.start is
// validated and returned unchanged.  Throws Error naming the constraint
// family when no feasible round body exists.
Vector initialize(const NlpProblem& problem);

SolveReport solve(const NlpProblem& problem, const IterateObserver& observer = {});

}  // namespace convopt
