#include "convopt/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <iterator>
#include <limits>
#include <map>

#include "convopt/formulas.hpp"
#include "convopt/gauge.hpp"
#include "convopt/geometry.hpp"
#include "convopt/shapes.hpp"

namespace convopt::oracle {

namespace {

struct Triangle {
  Vector2 a, b, c;
  double area() const {
    return oriented_area(a.x(), a.y(), b.x(), b.y(), c.x(), c.y());
  }
  double scale() const {
    double m = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(),
                         c.cwiseAbs().maxCoeff()});
    return std::max(1.0, m * m);
  }
};

Vector2 vertex_at(double p, double q, double theta) {
  return p * radial(theta) + q * tangential(theta);
}

}  // namespace

IdentitySample rigorous_area_identity(double rho1, double rho2, double rho3, double p1,
                                      double p3, double t, double h, Corruption corrupt) {
  // Substitution scheme: choose p2 so the middle radius is rho2, then p0 and
  // p4 so the outer radii are rho1 and rho3.
  const double c = std::cos(h), s2 = 2 * std::sin(h);
  const double p2 = (p1 + p3 - rho2 * (2 - 2 * c)) / (2 * c);
  const double p0 = rho1 * (2 - 2 * c) + 2 * c * p1 - p2;
  const double p4 = rho3 * (2 - 2 * c) + 2 * c * p3 - p2;
  Triangle tri{vertex_at(p1, (p2 - p0) / s2, t - h), vertex_at(p2, (p3 - p1) / s2, t),
               vertex_at(p3, (p4 - p2) / s2, t + h)};
  IdentitySample out;
  out.exact = tri.area();
  out.predicted = support_triangle_area(rho1, rho2, rho3, h);
  if (corrupt == Corruption::kRigorousArea) out.predicted *= 1.0 + 1e-6;
  out.scale = tri.scale();
  return out;
}

IdentitySample fd_area_expansion(double rho1, double rho2, double rho3, double p1,
                                 double p3, double t, double h, Corruption corrupt) {
  const double h2 = h * h;
  const double p2 = (p1 + p3 - rho2 * h2) / (2 - h2);
  const double p0 = (rho1 - p1) * h2 + 2 * p1 - p2;
  const double p4 = (rho3 - p3) * h2 + 2 * p3 - p2;
  Triangle tri{vertex_at(p1, (p2 - p0) / (2 * h), t - h), vertex_at(p2, (p3 - p1) / (2 * h), t),
               vertex_at(p3, (p4 - p2) / (2 * h), t + h)};
  IdentitySample out;
  out.exact = tri.area();
  out.predicted = fd_triangle_area_leading(p1, p3, rho1, rho2, rho3, h);
  if (corrupt == Corruption::kFdLeading) out.predicted *= 1.0 + 1e-3;
  out.scale = tri.scale();
  return out;
}

IdentitySample gauge_area_identity(double g1, double g2, double g3, double t, double h,
                                   Corruption corrupt) {
  Triangle tri{radial(t - h) / g1, radial(t) / g2, radial(t + h) / g3};
  IdentitySample out;
  out.exact = tri.area();
  out.predicted = gauge_triangle_area(g1, g2, g3, h);
  if (corrupt == Corruption::kGaugeArea) out.predicted *= 1.0 + 1e-6;
  out.scale = tri.scale();
  return out;
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                   double relative_step) {
  Vector g(x.size());
  Vector xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double eps = relative_step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + eps;
    const double fp = f(xp);
    xp[i] = x[i] - eps;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2 * eps);
  }
  return g;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("slope fit needs matching samples");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SupportVector random_feasible_support(Index n, std::mt19937_64& rng) {
  if (n < 5) throw ValidationError("feasible sampling needs n >= 5");
  // Cache the least-squares solver of the circulant radii map per grid size.
  static std::map<Index, Eigen::CompleteOrthogonalDecomposition<Matrix>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    const double h = grid_step(n);
    Matrix C = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      C(i, mod_index(i - 1, n)) += 1.0 / (2 - 2 * std::cos(h));
      C(i, mod_index(i + 1, n)) += 1.0 / (2 - 2 * std::cos(h));
      C(i, i) += -2 * std::cos(h) / (2 - 2 * std::cos(h));
    }
    it = cache.emplace(n, C.completeOrthogonalDecomposition()).first;
  }
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  Vector rho(n);
  for (Index i = 0; i < n; ++i) rho[i] = unif(rng);
  // Remove the first Fourier harmonic (translations do not change the radii,
  // so the attainable radii vectors are exactly the ones without it)...
  double a = 0, b = 0;
  for (Index i = 0; i < n; ++i) {
    double theta = grid_step(n) * static_cast<double>(i);
    a += rho[i] * std::cos(theta);
    b += rho[i] * std::sin(theta);
  }
  a *= 2.0 / static_cast<double>(n);
  b *= 2.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    double theta = grid_step(n) * static_cast<double>(i);
    rho[i] -= a * std::cos(theta) + b * std::sin(theta);
  }
  // ... then lift by a constant so the minimum is an exact zero: the sample
  // rides on the constraint boundary.
  rho.array() -= rho.minCoeff();
  SupportVector p = it->second.solve(rho);
  const double residual = (curvature_radii(p) - rho).cwiseAbs().maxCoeff();
  if (residual > 1e-8 * std::max(1.0, rho.maxCoeff()))
    throw Error("feasible sampler failed to reproduce the target radii");
  return p;
}

SupportVector fd_convexity_counterexample(Index n) {
  // The sinusoid sin(mu j) with cos(mu) = 1 - h^2/2 is annihilated by the fd
  // row p_{j+1} + p_{j-1} - (2 - h^2) p_j, so p_j = C - B sin(mu (j - c)) has
  // every row equal to h^2 C exactly (up to the seam at the antipode, where
  // the near-periodicity of mu leaves an O(B h^4) defect well inside the
  // margin).  Lifting the two center entries by alpha = h^2 (C - delta) /
  // (1 - h^2) pins the fd radii at c and c+1 to the tiny value delta while
  // the support values still drop by about s = B sin(2 mu) across the dip.
  // The rows certify the vector, but the dominant term of the triangle area
  // spanned by the vertices at (c, c+1, c+2) is s (delta - rho_{c+2}) < 0:
  // the polygon folds.
  if (n < 64) throw ValidationError("counterexample construction wants n >= 64");
  const double h = grid_step(n);
  const double mu = std::acos(1 - h * h / 2);
  const double s = 1.0;
  const double B = s / std::sin(2 * mu);
  const double C = B;
  const double delta = 1e-6 * C;
  const Index c = n / 2;
  SupportVector p(n);
  for (Index j = 0; j < n; ++j)
    p[j] = C - B * std::sin(mu * (static_cast<double>(j) - static_cast<double>(c)));
  const double alpha = h * h * (C - delta) / (1 - h * h);
  p[c] += alpha;
  p[c + 1] += alpha;

  // Postconditions: every fd row nonnegative, some triple cross product
  // negative under the fd construction.
  Vector rho_fd = curvature_radii_fd(p);
  if (rho_fd.minCoeff() < 0)
    throw Error("counterexample violates the fd rows it should satisfy");
  std::vector<Index> bad;
  if (is_convex(support_polygon_fd(p), 0.0, &bad))
    throw Error("counterexample unexpectedly produced a convex polygon");
  return p;
}

SuiteReport identity_suite(int draws, std::uint64_t seed, Corruption corrupt) {
  SuiteReport report;
  report.suite = "identities";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rho_dist(-5.0, 5.0);
  std::uniform_real_distribution<double> p_dist(-1.0, 3.0);
  std::uniform_real_distribution<double> gamma_dist(0.1, 5.0);
  std::uniform_real_distribution<double> t_dist(0.0, kTwoPi);
  const Index grids[] = {6, 8, 10, 12, 16, 20, 24, 32};

  double worst_rig = 0, worst_gauge = 0;
  for (int d = 0; d < draws; ++d) {
    const double h = grid_step(grids[static_cast<size_t>(d) % std::size(grids)]);
    {
      IdentitySample id = rigorous_area_identity(rho_dist(rng), rho_dist(rng), rho_dist(rng),
                                                 p_dist(rng), p_dist(rng), t_dist(rng), h,
                                                 corrupt);
      worst_rig = std::max(worst_rig, std::abs(id.residual()) /
                                          std::max(1.0, std::abs(id.exact)));
    }
    {
      IdentitySample id = gauge_area_identity(gamma_dist(rng), gamma_dist(rng),
                                              gamma_dist(rng), t_dist(rng), h, corrupt);
      worst_gauge = std::max(worst_gauge, std::abs(id.residual()) /
                                              std::max(1.0, std::abs(id.exact)));
    }
  }
  report.cases.push_back({"support_area_identity", worst_rig <= 1e-12, worst_rig, 1e-12,
                          "max residual over random draws, scaled by max(1, |area|)"});
  report.cases.push_back({"gauge_area_identity", worst_gauge <= 1e-12, worst_gauge, 1e-12,
                          "max residual over random draws, scaled by max(1, |area|)"});

  // O(h^5) residual of the fd expansion on fixed smooth data.
  std::vector<double> hs, residuals;
  for (int k = 0; k <= 4; ++k) {
    double h = 0.4 / std::pow(2.0, k);
    IdentitySample id =
        fd_area_expansion(1.3, 0.8, 1.7, 1.05, 0.95, 0.7, h, corrupt);
    hs.push_back(h);
    residuals.push_back(std::abs(id.residual()));
  }
  double slope = fit_loglog_slope(hs, residuals);
  report.cases.push_back({"fd_expansion_order", slope >= 4.5, slope, 4.5,
                          "log-log slope of the expansion residual under h halvings"});
  return report;
}

SuiteReport theorem_suite(std::uint64_t seed) {
  SuiteReport report;
  report.suite = "theorems";
  std::mt19937_64 rng(seed);

  // Approximation bound d_H <= diam/2 * tan(pi/n) for the three fixtures.
  const ShapeDescriptor fixtures[] = {ShapeDescriptor::disk(1.0),
                                      ShapeDescriptor::square(2.0),
                                      ShapeDescriptor::reuleaux(1.0)};
  const Index grid_sizes[] = {8, 16, 32, 64, 128};
  const Index dense = 8192;
  for (const auto& shape : fixtures) {
    double worst_margin = std::numeric_limits<double>::infinity();
    double last_d = 0, first_d = 0;
    for (Index n : grid_sizes) {
      ConvexPolygon P = support_polygon(sample_support(shape, n));
      double d = 0;
      for (Index j = 0; j < dense; ++j) {
        double theta = kTwoPi * static_cast<double>(j) / static_cast<double>(dense);
        d = std::max(d, std::abs(polygon_support(P, theta) - shape_support(shape, theta)));
      }
      double bound = 0.5 * shape_diameter(shape) * std::tan(kPi / static_cast<double>(n));
      worst_margin = std::min(worst_margin, bound - d);
      if (n == grid_sizes[0]) first_d = d;
      last_d = d;
    }
    // Symmetry can make the coarsest grid exact (square at n = 8), in which
    // case the decay check is vacuous.
    bool decays = last_d <= first_d + 1e-12 || first_d <= 1e-9 * shape_diameter(shape);
    bool pass = worst_margin >= 0 && decays;
    report.cases.push_back({"hausdorff_bound_" + shape_name(shape), pass, worst_margin, 0.0,
                            "min over n of (bound - measured Hausdorff distance)"});
  }

  // Sampled support values of convex bodies always satisfy the rigorous rows.
  {
    double worst = 0;
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
      Index n = 5 + static_cast<Index>(rng() % 60);
      ShapeDescriptor shape;
      switch (rep % 4) {
        case 0:
          shape = ShapeDescriptor::disk(1.0 + unif(rng), {0.3 * unif(rng), 0.3 * unif(rng)});
          break;
        case 1:
          shape = ShapeDescriptor::square(1.0 + std::abs(unif(rng)));
          break;
        case 2:
          shape = ShapeDescriptor::reuleaux(1.0 + std::abs(unif(rng)));
          break;
        default: {
          Matrix2X pts(2, 12);
          for (Index i = 0; i < pts.cols(); ++i)
            pts.col(i) = Vector2(unif(rng), unif(rng)) * 2.0;
          shape = ShapeDescriptor::polygon(convex_hull(pts).vertices);
          break;
        }
      }
      Vector p = sample_support(shape, n);
      Vector rho = curvature_radii(p);
      worst = std::max(worst, -rho.minCoeff() / std::max(1.0, p.cwiseAbs().maxCoeff()));
    }
    report.cases.push_back({"sampled_support_feasible", worst <= 1e-12, worst, 1e-12,
                            "worst scaled row violation over sampled convex bodies"});
  }

  // Geometric lemma: A_i lies on its own support line, inside the adjacent
  // halfplanes, between consecutive support-line intersections, and the
  // skip-one intersection has radial coordinate (p_{i+1}+p_{i-1})/(2 cos h)
  // and tangential coordinate q_i.
  {
    double worst = 0;
    for (int rep = 0; rep < 20; ++rep) {
      Index n = 6 + static_cast<Index>(rng() % 40);
      SupportVector p = random_feasible_support(n, rng);
      const double h = grid_step(n);
      Vector q = tangential_coeffs(p);
      ConvexPolygon P = support_polygon(p);
      auto line_intersection = [&](Index i, Index j) {
        Eigen::Matrix2d A;
        A.row(0) = radial(grid_step(n) * static_cast<double>(i)).transpose();
        A.row(1) = radial(grid_step(n) * static_cast<double>(j)).transpose();
        return Vector2(A.partialPivLu().solve(Vector2(p[mod_index(i, n)], p[mod_index(j, n)])));
      };
      const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
      for (Index i = 0; i < n; ++i) {
        Vector2 A_i = P.vertex(i);
        double theta = grid_step(n) * static_cast<double>(i);
        worst = std::max(worst, std::abs(A_i.dot(radial(theta)) - p[i]) / scale);
        for (Index d : {Index(-1), Index(1)}) {
          double theta_adj = grid_step(n) * static_cast<double>(i + d);
          worst = std::max(worst,
                           (A_i.dot(radial(theta_adj)) - p[mod_index(i + d, n)]) / scale);
        }
        Vector2 Z = line_intersection(i - 1, i + 1);
        worst = std::max(worst, std::abs(Z.dot(radial(theta)) -
                                         (p[mod_index(i + 1, n)] + p[mod_index(i - 1, n)]) /
                                             (2 * std::cos(h))) /
                                    scale);
        worst = std::max(worst, std::abs(Z.dot(tangential(theta)) - q[i]) / scale);
        // A_i between the consecutive intersections Y_{i-1} and Y_i.
        Vector2 Ym = line_intersection(i - 1, i), Yp = line_intersection(i, i + 1);
        double along = (Yp - Ym).dot(A_i - Ym);
        double len2 = (Yp - Ym).squaredNorm();
        worst = std::max(worst, std::abs(cross2(Yp - Ym, A_i - Ym)) /
                                    std::max(1.0, len2));
        worst = std::max(worst, (-along) / std::max(1.0, len2));
        worst = std::max(worst, (along - len2) / std::max(1.0, len2));
      }
    }
    report.cases.push_back({"support_line_lemma", worst <= 1e-9, worst, 1e-9,
                            "worst scaled defect of the support-line geometry"});
  }
  return report;
}

}  // namespace convopt::oracle
