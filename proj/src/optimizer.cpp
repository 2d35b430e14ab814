#include "convopt/optimizer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "convopt/support.hpp"

namespace convopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBarrierShrink = 0.2;
constexpr double kBoundaryFraction = 0.99;

using SparseRow = LinearConstraintSet::SparseRowMatrix;

void validate_dimensions(const NlpProblem& problem) {
  const Index n = problem.objective.dim;
  if (n < 1) throw ValidationError("problem dimension must be positive");
  if (!problem.objective.eval) throw ValidationError("problem has no objective callback");
  if (problem.constraints.dim != n) throw ValidationError("constraint dimension mismatch");
  if (problem.lower.size() && problem.lower.size() != n)
    throw ValidationError("lower bound dimension mismatch");
  if (problem.upper.size() && problem.upper.size() != n)
    throw ValidationError("upper bound dimension mismatch");
  if (problem.start.size() && problem.start.size() != n)
    throw ValidationError("start dimension mismatch");
}

// Box bounds folded into the row system so one barrier covers everything.
LinearConstraintSet rows_with_box(const NlpProblem& problem) {
  LinearConstraintSet all = problem.constraints;
  for (Index i = 0; i < problem.lower.size(); ++i)
    if (std::isfinite(problem.lower[i]))
      all.add_ineq({{i, 1.0}}, problem.lower[i], {ConstraintFamily::kCustom, i});
  for (Index i = 0; i < problem.upper.size(); ++i)
    if (std::isfinite(problem.upper[i]))
      all.add_ineq({{i, -1.0}}, -problem.upper[i], {ConstraintFamily::kCustom, i});
  return all;
}

std::string describe_row(const RowTag& tag) {
  return family_name(tag.family) + " row at index " + std::to_string(tag.index);
}

void require_strictly_feasible(const LinearConstraintSet& all, const Vector& x,
                               double tol_feas) {
  if (all.num_ineq() > 0) {
    Vector s = all.ineq_matrix() * x - all.ineq_lower();
    Index i = 0;
    if (s.minCoeff(&i) <= 0) {
      const RowTag& tag = all.ineq_tags[static_cast<size_t>(i)];
      throw InfeasibleParameters("start is not strictly feasible: " + describe_row(tag),
                                 {tag.index});
    }
  }
  if (all.num_eq() > 0) {
    Vector r = (all.eq_matrix() * x - all.eq_values()).cwiseAbs();
    Index i = 0;
    if (r.maxCoeff(&i) > std::max(tol_feas, 1e-12)) {
      const RowTag& tag = all.eq_tags[static_cast<size_t>(i)];
      throw InfeasibleParameters("start violates equality: " + describe_row(tag),
                                 {tag.index});
    }
  }
}

// Reduced coordinates: x = base + Z y with Z an orthonormal basis of the
// equality null space (identity when there are no equalities).
struct ReducedSpace {
  Matrix Z;
  bool has_eq = false;

  Index dim(Index n) const { return has_eq ? Z.cols() : n; }
  Vector full_direction(const Vector& d) const { return has_eq ? Vector(Z * d) : d; }
  Vector reduced_gradient(const Vector& g) const {
    return has_eq ? Vector(Z.transpose() * g) : g;
  }
};

ReducedSpace reduced_space(const SparseRow& E, Index n) {
  ReducedSpace red;
  if (E.rows() == 0) return red;
  Matrix dense_eq(E);
  Eigen::FullPivLU<Matrix> lu(dense_eq);
  Matrix kernel = lu.kernel();
  if (lu.rank() == n) kernel = Matrix::Zero(n, 0);
  Eigen::HouseholderQR<Matrix> qr(kernel);
  red.Z = qr.householderQ() * Matrix::Identity(n, kernel.cols());
  red.has_eq = true;
  return red;
}

// Lawson-Hanson active-set method: minimizes |M z - b|_2 subject to z >= 0.
Vector nonnegative_least_squares(const Matrix& M, const Vector& b) {
  const Index p = M.cols();
  Vector z = Vector::Zero(p);
  std::vector<bool> passive(static_cast<size_t>(p), false);
  Vector w = M.transpose() * b;
  const double tol = 1e-12 * std::max(1.0, w.lpNorm<Eigen::Infinity>());

  auto passive_solve = [&](const std::vector<Index>& idx) {
    Matrix sub(M.rows(), static_cast<Index>(idx.size()));
    for (size_t t = 0; t < idx.size(); ++t) sub.col(static_cast<Index>(t)) = M.col(idx[t]);
    return Vector(sub.colPivHouseholderQr().solve(b));
  };

  for (Index round = 0; round < 3 * p + 10; ++round) {
    Index entering = -1;
    double best = tol;
    for (Index j = 0; j < p; ++j)
      if (!passive[static_cast<size_t>(j)] && w[j] > best) {
        best = w[j];
        entering = j;
      }
    if (entering < 0) break;
    passive[static_cast<size_t>(entering)] = true;

    for (Index guard = 0; guard <= p; ++guard) {
      std::vector<Index> idx;
      for (Index j = 0; j < p; ++j)
        if (passive[static_cast<size_t>(j)]) idx.push_back(j);
      if (idx.empty()) {
        z.setZero();
        break;
      }
      Vector trial = passive_solve(idx);
      if (trial.minCoeff() > 0) {
        z.setZero();
        for (size_t t = 0; t < idx.size(); ++t) z[idx[t]] = trial[static_cast<Index>(t)];
        break;
      }
      // Step toward the trial until the first passive coordinate reaches zero.
      double alpha = 1.0;
      for (size_t t = 0; t < idx.size(); ++t)
        if (trial[static_cast<Index>(t)] <= 0) {
          const double zt = z[idx[t]];
          alpha = std::min(alpha, zt / (zt - trial[static_cast<Index>(t)]));
        }
      for (size_t t = 0; t < idx.size(); ++t) {
        z[idx[t]] += alpha * (trial[static_cast<Index>(t)] - z[idx[t]]);
        if (z[idx[t]] <= tol) {
          z[idx[t]] = 0.0;
          passive[static_cast<size_t>(idx[t])] = false;
        }
      }
    }
    w = M.transpose() * (b - M * z);
  }
  return z;
}

}  // namespace

std::string termination_name(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kConverged: return "converged";
    case TerminationReason::kIterationLimit: return "iteration-limit";
    case TerminationReason::kLineSearchFailure: return "line-search-failure";
  }
  return "unknown";
}

// Low-harmonic noise: smooth perturbations consume the curvature slack of a
// round body at the same O(h^2) rate as the slack itself, so the step that
// survives feasibility backtracking stays macroscopic.  Per-component noise
// has O(1) second differences and would be damped to the slack scale.
Vector smooth_noise(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> gauss;
  Vector delta = Vector::Zero(n);
  const Index k_max = std::min<Index>(8, n / 2 - 1);
  for (Index k = 2; k <= k_max; ++k) {
    const double ak = gauss(rng) / static_cast<double>(k);
    const double bk = gauss(rng) / static_cast<double>(k);
    for (Index i = 0; i < n; ++i) {
      const double angle = kTwoPi * static_cast<double>(k * i) / static_cast<double>(n);
      delta[i] += ak * std::cos(angle) + bk * std::sin(angle);
    }
  }
  if (k_max < 2)
    for (Index i = 0; i < n; ++i) delta[i] = gauss(rng);
  return delta;
}

// Push a feasible point with exactly-tight inequality rows (typical when an
// equality pins the round radius against parallel bounds) into the strict
// interior.  The step gains slack uniformly on the tight rows while a
// weighted least-squares penalty keeps consumption of the remaining slacks
// minimal, which favours smooth directions that respect the tiny curvature
// margins of a round body.
Vector interior_push(const LinearConstraintSet& all, const SparseRow& A, const Vector& lb,
                     const SparseRow& E, const Vector& base) {
  const Index n = base.size();
  const double scale = std::max(1.0, base.cwiseAbs().maxCoeff());
  const double tau = 1e-9 * scale;
  const Vector slack = A * base - lb;

  std::vector<Index> tight;
  for (Index r = 0; r < slack.size(); ++r)
    if (slack[r] <= tau) tight.push_back(r);

  Matrix G = Matrix::Zero(n, n);
  for (Index r = 0; r < A.rows(); ++r) {
    if (slack[r] <= tau) continue;
    const double w = 1.0 / slack[r];
    for (SparseRow::InnerIterator it_a(A, r); it_a; ++it_a)
      for (SparseRow::InnerIterator it_b(A, r); it_b; ++it_b)
        G(it_a.col(), it_b.col()) += w * w * it_a.value() * it_b.value();
  }
  const double ridge = 1e-6 * std::max(1.0, G.diagonal().maxCoeff());
  G.diagonal().array() += ridge;

  const Index t = static_cast<Index>(tight.size());
  Matrix C = Matrix::Zero(t + E.rows(), n);
  for (Index k = 0; k < t; ++k)
    for (SparseRow::InnerIterator it(A, tight[static_cast<size_t>(k)]); it; ++it)
      C(k, it.col()) = it.value();
  for (Index r = 0; r < E.rows(); ++r)
    for (SparseRow::InnerIterator it(E, r); it; ++it) C(t + r, it.col()) = it.value();
  Vector target(t + E.rows());
  target.head(t).setOnes();
  target.tail(E.rows()).setZero();

  // Minimum-penalty step with C d = target: d = G^-1 C^T mu.
  Eigen::LLT<Matrix> llt(G);
  Matrix Ginv_Ct = llt.solve(C.transpose());
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod((Matrix(C * Ginv_Ct)));
  Vector d = Ginv_Ct * cod.solve(target);

  const double size = d.cwiseAbs().maxCoeff();
  if (size > 0) {
    double beta = 0.25 * scale / size;
    for (int halving = 0; halving < 60; ++halving) {
      Vector x = base + beta * d;
      if ((A * x - lb).minCoeff() > 0) return x;
      beta *= 0.5;
    }
  }
  Index i = 0;
  slack.minCoeff(&i);
  throw Error("no strictly feasible round start: " +
              describe_row(all.ineq_tags[static_cast<size_t>(i)]));
}

Vector initialize(const NlpProblem& problem) {
  validate_dimensions(problem);
  const Index n = problem.objective.dim;
  LinearConstraintSet all = rows_with_box(problem);

  if (problem.start.size()) {
    require_strictly_feasible(all, problem.start, problem.tol_feas);
    return problem.start;
  }

  // Interval of round bodies x = c * ones admitted by every row.
  SparseRow A = all.ineq_matrix();
  Vector lb = all.ineq_lower();
  Vector ones = Vector::Ones(n);
  Vector row_sum = A * ones;
  double c_lo = -kInf, c_hi = kInf;
  RowTag lo_tag, hi_tag;
  for (Index r = 0; r < all.num_ineq(); ++r) {
    const double sigma = row_sum[r];
    if (std::abs(sigma) <= 1e-12) {
      if (lb[r] > 1e-12)
        throw Error("no feasible round start: " +
                    describe_row(all.ineq_tags[static_cast<size_t>(r)]) +
                    " excludes every round body");
      continue;
    }
    const double bound = lb[r] / sigma;
    if (sigma > 0 && bound > c_lo) {
      c_lo = bound;
      lo_tag = all.ineq_tags[static_cast<size_t>(r)];
    } else if (sigma < 0 && bound < c_hi) {
      c_hi = bound;
      hi_tag = all.ineq_tags[static_cast<size_t>(r)];
    }
  }

  SparseRow E = all.eq_matrix();
  Vector rhs = all.eq_values();
  Vector eq_sum = E * ones;
  double c_eq = std::numeric_limits<double>::quiet_NaN();
  for (Index r = 0; r < all.num_eq(); ++r) {
    const double sigma = eq_sum[r];
    const std::string row = describe_row(all.eq_tags[static_cast<size_t>(r)]);
    if (std::abs(sigma) <= 1e-12) {
      if (std::abs(rhs[r]) > 1e-12)
        throw Error("no feasible round start: " + row + " excludes every round body");
      continue;
    }
    const double candidate = rhs[r] / sigma;
    if (std::isnan(c_eq))
      c_eq = candidate;
    else if (std::abs(candidate - c_eq) > 1e-9 * std::max(1.0, std::abs(c_eq)))
      throw Error("no feasible round start: equalities pin conflicting radii (" + row + ")");
  }

  double c;
  if (!std::isnan(c_eq)) {
    c = c_eq;
  } else if (std::isfinite(c_lo) && std::isfinite(c_hi)) {
    if (c_hi - c_lo <= 1e-12 * std::max(1.0, std::abs(c_hi)))
      throw Error("no strictly feasible round start: " + describe_row(lo_tag) +
                  " against " + describe_row(hi_tag));
    c = 0.5 * (c_lo + c_hi);
  } else if (std::isfinite(c_lo)) {
    c = c_lo > 0 ? 1.5 * c_lo : std::max(1.0, c_lo + 1.0);
  } else if (std::isfinite(c_hi)) {
    c = c_hi > 0 ? 0.5 * c_hi : c_hi - 1.0;
  } else {
    c = 1.0;
  }

  Vector base = c * ones;
  {
    RowTag worst;
    if (all.max_violation(base, &worst) > std::max(problem.tol_feas, 1e-12))
      throw Error("no feasible round start: " + describe_row(worst));
  }
  if (all.num_ineq() > 0 && (A * base - lb).minCoeff() <= 0)
    base = interior_push(all, A, lb, E, base);

  if (problem.perturbation > 0) {
    std::mt19937_64 rng(problem.seed);
    Vector delta = smooth_noise(rng, n);
    if (E.rows() > 0) {
      // Stay on the equality manifold: remove the range component.
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod((Matrix(E)));
      delta -= cod.solve(Vector(E * delta));
    }
    const double size = delta.cwiseAbs().maxCoeff();
    if (size > 0) {
      delta *= problem.perturbation * std::max(1.0, std::abs(c)) / size;
      for (int halving = 0; halving < 60; ++halving) {
        Vector x = base + delta;
        if (all.num_ineq() == 0 || (A * x - lb).minCoeff() > 0) return x;
        delta *= 0.5;
      }
    }
  }
  return base;
}

SolveReport solve(const NlpProblem& problem, const IterateObserver& observer) {
  Vector x = initialize(problem);
  const Index n = problem.objective.dim;
  LinearConstraintSet all = rows_with_box(problem);
  SparseRow A = all.ineq_matrix();
  Vector lb = all.ineq_lower();
  const Index m = all.num_ineq();
  ReducedSpace red = reduced_space(all.eq_matrix(), n);
  const Index r = red.dim(n);

  SolveReport report;
  int evaluations = 0;
  int total_inner = 0;

  auto eval = [&](const Vector& at, Vector* grad) -> double {
    ++evaluations;
    double value;
    try {
      value = problem.objective.eval(at, grad);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "objective '" << problem.objective.name << "' failed at iteration "
         << total_inner << " (point sup-norm " << at.cwiseAbs().maxCoeff() << "): " << e.what();
      throw Error(os.str());
    }
    if (!std::isfinite(value)) throw Error("objective returned a non-finite value");
    if (problem.centering > 0) {
      Vector q = tangential_coeffs(at);
      value += problem.centering * q.squaredNorm();
      if (grad) {
        const double sh = std::sin(grid_step(n));
        for (Index j = 0; j < n; ++j)
          (*grad)[j] +=
              problem.centering * (q[mod_index(j - 1, n)] - q[mod_index(j + 1, n)]) / sh;
      }
    }
    return value;
  };

  auto finish = [&](TerminationReason reason, double f_val, double stationarity) {
    report.point = x;
    report.objective = problem.objective.sign * f_val;
    report.stationarity = stationarity;
    report.violation = all.max_violation(x);
    report.iterations = total_inner;
    report.evaluations = evaluations;
    report.reason = reason;
    return report;
  };

  Vector gf(n);
  double f_val = eval(x, &gf);

  if (r == 0)  // the equalities pin the point completely
    return finish(TerminationReason::kConverged, f_val, 0.0);

  Vector slack = m > 0 ? Vector(A * x - lb) : Vector();
  auto barrier_value = [&](double f, const Vector& s, double mu) {
    return m > 0 ? f - mu * s.array().log().sum() : f;
  };
  auto barrier_gradient = [&](const Vector& grad_f, const Vector& s, double mu) {
    if (m == 0) return red.reduced_gradient(grad_f);
    Vector full = grad_f - A.transpose() * Vector(mu * s.cwiseInverse());
    return red.reduced_gradient(full);
  };

  // KKT residual with nonnegative-least-squares multipliers over the rows
  // whose barrier multipliers are significant.  The barrier estimate
  // lambda_i = mu/s_i degrades once active slacks reach the numerical floor,
  // and at vertex optima the active gradients are linearly dependent, so an
  // unconstrained fit produces mixed-sign multipliers; the sign-constrained
  // fit is the measure that certifies convergence there.
  SparseRow E = all.eq_matrix();
  Matrix eq_span(n, 0);
  if (E.rows() > 0) {
    Matrix eq_columns = Matrix(E).transpose();
    Eigen::ColPivHouseholderQR<Matrix> qr(eq_columns);
    eq_span = qr.householderQ() * Matrix::Identity(n, qr.rank());
  }
  auto drop_eq_span = [&](Vector v) {
    if (eq_span.cols() > 0) v -= eq_span * (eq_span.transpose() * v);
    return v;
  };
  auto kkt_residual = [&](const Vector& grad_f, const Vector& s, double mu_now) {
    const double threshold = 1e-6 * std::max(1.0, grad_f.lpNorm<Eigen::Infinity>());
    std::vector<Index> active;
    for (Index i = 0; i < m; ++i)
      if (mu_now / s[i] >= threshold) active.push_back(i);
    const Index p = static_cast<Index>(active.size());
    const Vector b = drop_eq_span(grad_f);
    if (p == 0) return b.lpNorm<Eigen::Infinity>();
    Matrix columns(n, p);
    columns.setZero();
    for (Index j = 0; j < p; ++j)
      for (SparseRow::InnerIterator it(A, active[static_cast<size_t>(j)]); it; ++it)
        columns(it.col(), j) = it.value();
    for (Index j = 0; j < p; ++j)
      columns.col(j) = drop_eq_span(columns.col(j));
    Vector lambda = nonnegative_least_squares(columns, b);
    double complementarity = 0.0;
    for (Index j = 0; j < p; ++j)
      complementarity =
          std::max(complementarity, lambda[j] * s[active[static_cast<size_t>(j)]]);
    const double residual = (b - columns * lambda).lpNorm<Eigen::Infinity>();
    return std::max(residual, complementarity);
  };

  // Stage-start curvature model: the barrier Hessian is dominated near the
  // walls by mu A^T S^-2 A, which is available exactly; seeding BFGS with its
  // (regularized, reduced) inverse removes most of the wall-induced
  // ill-conditioning that an identity start would have to learn step by step.
  auto stage_metric = [&](double mu_now, const Vector& s, const Vector& grad_f,
                          const Vector& g_red) -> Matrix {
    if (m == 0)
      return Matrix::Identity(r, r) / std::max(1.0, g_red.lpNorm<Eigen::Infinity>());
    Matrix full = Matrix::Zero(n, n);
    for (Index i = 0; i < m; ++i) {
      const double w = mu_now / (s[i] * s[i]);
      for (SparseRow::InnerIterator a(A, i); a; ++a)
        for (SparseRow::InnerIterator b(A, i); b; ++b)
          full(a.col(), b.col()) += w * a.value() * b.value();
    }
    const double delta =
        std::max(1e-8, grad_f.lpNorm<Eigen::Infinity>() /
                           std::max(1.0, x.lpNorm<Eigen::Infinity>()));
    full.diagonal().array() += delta;
    Matrix reduced = red.has_eq ? Matrix(red.Z.transpose() * full * red.Z) : full;
    Eigen::LLT<Matrix> llt(reduced);
    if (llt.info() != Eigen::Success)
      return Matrix::Identity(r, r) / std::max(1.0, g_red.lpNorm<Eigen::Infinity>());
    return llt.solve(Matrix::Identity(r, r));
  };

  // A first-order certificate cannot tell a minimum from a saddle, and
  // symmetric problems park exactly on one: a round body is a critical point
  // of the area on the constant-width manifold, and the disk is the critical
  // point of the volume product.  Before accepting convergence, probe with a
  // seeded feasible perturbation; a strict objective decrease unmasks the
  // saddle and restarts the descent from the probe point.
  std::mt19937_64 probe_rng(problem.seed ^ 0x9e3779b97f4a7c15ULL);
  int escapes = 0;
  constexpr int kMaxEscapes = 5;
  auto saddle_escape = [&](double& f_here, Vector& grad_here, Vector& slack_here) {
    if (problem.perturbation <= 0 || escapes >= kMaxEscapes) return false;
    Vector delta = drop_eq_span(smooth_noise(probe_rng, n));
    const double size = delta.cwiseAbs().maxCoeff();
    if (!(size > 0)) return false;
    delta *= problem.perturbation * std::max(1.0, x.lpNorm<Eigen::Infinity>()) / size;
    for (int halving = 0; halving < 60; ++halving) {
      Vector trial = x + delta;
      if (m == 0 || (A * trial - lb).minCoeff() > 0) {
        Vector g_trial(n);
        double f_trial;
        try {
          f_trial = eval(trial, &g_trial);
        } catch (const Error&) {
          return false;
        }
        if (f_trial >= f_here - 1e-8 * std::max(1.0, std::abs(f_here))) return false;
        x = trial;
        f_here = f_trial;
        grad_here = g_trial;
        if (m > 0) slack_here = A * x - lb;
        ++escapes;
        return true;
      }
      delta *= 0.5;
    }
    return false;
  };

  double mu = m > 0 ? 0.1 * std::max(1.0, std::abs(f_val)) : 0.0;
  double stationarity = kInf;
  bool line_search_failed = false;

  for (int stage = 0; stage < problem.max_outer; ++stage) {
    Vector g = barrier_gradient(gf, slack, mu);
    double psi = barrier_value(f_val, slack, mu);
    Matrix h_inv = stage_metric(mu, slack, gf, g);
    const double inner_tol = m > 0 ? std::max(0.5 * mu, 0.1 * problem.tol_kkt)
                                   : 0.5 * problem.tol_kkt;
    line_search_failed = false;

    for (int inner = 0; inner < problem.max_inner; ++inner) {
      if (g.lpNorm<Eigen::Infinity>() <= inner_tol) break;

      Vector d = -(h_inv * g);
      double slope = g.dot(d);
      if (!(slope < 0)) {  // restore descent after a bad curvature model
        h_inv = Matrix::Identity(r, r) / std::max(1.0, g.lpNorm<Eigen::Infinity>());
        d = -(h_inv * g);
        slope = g.dot(d);
      }
      Vector dx = red.full_direction(d);

      double alpha = 1.0;
      if (m > 0) {
        Vector advance = A * dx;
        for (Index i = 0; i < m; ++i)
          if (advance[i] < 0)
            alpha = std::min(alpha, -kBoundaryFraction * slack[i] / advance[i]);
      }
      if (!(alpha > 0)) {
        line_search_failed = true;
        break;
      }

      bool accepted = false;
      Vector x_new, slack_new, gf_new(n);
      double f_new = 0, psi_new = 0;
      for (int backtrack = 0; backtrack < 60 && alpha >= 1e-16; ++backtrack) {
        x_new = x + alpha * dx;
        slack_new = m > 0 ? Vector(A * x_new - lb) : Vector();
        if (m == 0 || slack_new.minCoeff() > 0) {
          f_new = eval(x_new, &gf_new);
          psi_new = barrier_value(f_new, slack_new, mu);
          if (std::isfinite(psi_new) && psi_new <= psi + 1e-4 * alpha * slope) {
            accepted = true;
            break;
          }
          if (std::isfinite(psi_new)) {
            // Quadratic interpolation through psi(0), slope, psi(alpha),
            // safeguarded into [alpha/10, alpha/2].
            const double denom = 2 * (psi_new - psi - alpha * slope);
            double alpha_q = denom > 0 ? -slope * alpha * alpha / denom : 0.5 * alpha;
            alpha = std::clamp(alpha_q, 0.1 * alpha, 0.5 * alpha);
            continue;
          }
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        line_search_failed = true;
        break;
      }

      Vector step = alpha * d;
      x = x_new;
      slack = slack_new;
      f_val = f_new;
      gf = gf_new;
      Vector g_new = barrier_gradient(gf, slack, mu);
      Vector dg = g_new - g;
      const double sy = step.dot(dg);
      if (sy > 1e-12 * step.norm() * dg.norm()) {
        const double rho = 1.0 / sy;
        Vector hy = h_inv * dg;
        h_inv += ((sy + dg.dot(hy)) * rho * rho) * (step * step.transpose());
        h_inv -= rho * (hy * step.transpose() + step * hy.transpose());
      }
      g = g_new;
      psi = psi_new;
      ++total_inner;
      if (observer) observer(x, problem.objective.sign * f_val);
    }

    stationarity = std::max(g.lpNorm<Eigen::Infinity>(), m > 0 ? mu : 0.0);
    if (m > 0) stationarity = std::min(stationarity, kkt_residual(gf, slack, mu));
    if (std::getenv("CONVOPT_TRACE"))
      std::fprintf(stderr, "stage=%d mu=%.3e f=%.9f stat=%.3e inner=%d lsfail=%d\n", stage,
                   mu, problem.objective.sign * f_val, stationarity, total_inner,
                   line_search_failed ? 1 : 0);
    if (stationarity <= problem.tol_kkt) {
      if (!saddle_escape(f_val, gf, slack))
        return finish(TerminationReason::kConverged, f_val, stationarity);
      stationarity = kInf;
      // Recentre: the descent from the probe point needs the same barrier
      // continuation the original start received.
      if (m > 0) mu = std::max(mu, 1e-3 * std::max(1.0, std::abs(f_val)));
    }
    if (m == 0) {
      if (line_search_failed)
        return finish(TerminationReason::kLineSearchFailure, f_val, stationarity);
      continue;  // fresh curvature model, more budget
    }
    mu *= kBarrierShrink;
    if (mu < 1e-14) break;
  }

  return finish(line_search_failed ? TerminationReason::kLineSearchFailure
                                   : TerminationReason::kIterationLimit,
                f_val, stationarity);
}

}  // namespace convopt
