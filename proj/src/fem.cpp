#include "convopt/fem.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <unordered_map>
#include <utility>

namespace convopt::fem {
namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

double triangle_area(const Mesh& mesh, Index t) {
  Vector2 a = mesh.nodes.col(mesh.triangles(0, t));
  Vector2 b = mesh.nodes.col(mesh.triangles(1, t));
  Vector2 c = mesh.nodes.col(mesh.triangles(2, t));
  return 0.5 * cross2(b - a, c - a);
}

std::uint64_t edge_key(Index a, Index b, Index num_nodes) {
  if (a > b) std::swap(a, b);
  return static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(num_nodes) +
         static_cast<std::uint64_t>(b);
}

// Stiffness and mass restricted to the interior (Dirichlet) nodes, plus the
// P1 load vector when a source is given.  The load uses the edge-midpoint
// rule, exact for quadratic integrands.
struct ReducedSystem {
  SparseMatrix stiffness, mass;
  Vector load;
  std::vector<Index> interior;  // reduced index -> node id
};

ReducedSystem assemble(const Mesh& mesh, const std::function<double(const Vector2&)>* source) {
  const Index nn = mesh.node_count();
  ReducedSystem sys;
  std::vector<Index> reduced(static_cast<std::size_t>(nn), -1);
  for (Index i = 0; i < nn; ++i)
    if (!mesh.on_boundary[static_cast<std::size_t>(i)]) {
      reduced[static_cast<std::size_t>(i)] = static_cast<Index>(sys.interior.size());
      sys.interior.push_back(i);
    }
  const Index ni = static_cast<Index>(sys.interior.size());
  if (ni == 0) throw ValidationError("mesh has no interior nodes; decrease the element size");
  if (source) sys.load = Vector::Zero(ni);

  std::vector<Triplet> tk, tm;
  tk.reserve(static_cast<std::size_t>(9 * mesh.triangle_count()));
  tm.reserve(static_cast<std::size_t>(9 * mesh.triangle_count()));
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const Index id[3] = {mesh.triangles(0, t), mesh.triangles(1, t), mesh.triangles(2, t)};
    const Vector2 x[3] = {mesh.nodes.col(id[0]), mesh.nodes.col(id[1]), mesh.nodes.col(id[2])};
    const double area = 0.5 * cross2(x[1] - x[0], x[2] - x[0]);
    if (!(area > 0)) throw ValidationError("mesh contains a degenerate or inverted triangle");
    Vector2 g[3];
    for (int i = 0; i < 3; ++i) {
      Vector2 opposite = x[(i + 2) % 3] - x[(i + 1) % 3];
      g[i] = Vector2(-opposite.y(), opposite.x()) / (2 * area);
    }
    for (int i = 0; i < 3; ++i) {
      Index ri = reduced[static_cast<std::size_t>(id[i])];
      if (ri < 0) continue;
      for (int j = 0; j < 3; ++j) {
        Index rj = reduced[static_cast<std::size_t>(id[j])];
        if (rj < 0) continue;
        tk.emplace_back(ri, rj, area * g[i].dot(g[j]));
        tm.emplace_back(ri, rj, area / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
    if (source) {
      double fm[3];  // midpoints of edges (0,1), (1,2), (2,0)
      for (int e = 0; e < 3; ++e) fm[e] = (*source)(0.5 * (x[e] + x[(e + 1) % 3]));
      const double fsum[3] = {fm[0] + fm[2], fm[1] + fm[0], fm[2] + fm[1]};
      for (int i = 0; i < 3; ++i) {
        Index ri = reduced[static_cast<std::size_t>(id[i])];
        if (ri >= 0) sys.load[ri] += area / 6.0 * fsum[i];
      }
    }
  }
  sys.stiffness.resize(ni, ni);
  sys.stiffness.setFromTriplets(tk.begin(), tk.end());
  sys.mass.resize(ni, ni);
  sys.mass.setFromTriplets(tm.begin(), tm.end());
  return sys;
}

DiscreteField expand(const Mesh& mesh, const std::vector<Index>& interior, const Vector& ui) {
  DiscreteField u;
  u.values = Vector::Zero(mesh.node_count());
  for (Index r = 0; r < static_cast<Index>(interior.size()); ++r)
    u.values[interior[static_cast<std::size_t>(r)]] = ui[r];
  return u;
}

}  // namespace

namespace {

Mesh structured_fan(const ConvexPolygon& P, double split, double diam) {
  const Index n = P.size();
  const Vector2 c = polygon_centroid(P);
  double r_max = 0;
  for (Index i = 0; i < n; ++i) r_max = std::max(r_max, (P.vertex(i) - c).norm());
  const Index rings = std::max<Index>(1, static_cast<Index>(std::ceil(r_max / split)));

  // One column block per non-degenerate polygon edge; zero-length edges
  // contribute no boundary nodes.
  struct Block {
    Index edge = 0, start = 0, cols = 0;
  };
  std::vector<Block> blocks;
  Index total = 0;
  const double len_tol = 1e-12 * diam;
  for (Index i = 0; i < n; ++i) {
    double len = P.edge_length(i);
    if (len <= len_tol) continue;
    Index cols = std::max<Index>(1, static_cast<Index>(std::ceil(len / split)));
    blocks.push_back({i, total, cols});
    total += cols;
  }
  if (blocks.size() < 3) throw ValidationError("polygon is too thin to mesh");

  Matrix2X ring(2, total);
  std::vector<Index> ring_edge(static_cast<std::size_t>(total));
  std::vector<double> ring_s(static_cast<std::size_t>(total));
  for (const Block& blk : blocks) {
    Vector2 a = P.vertex(blk.edge), b = P.vertex(blk.edge + 1);
    for (Index j = 0; j < blk.cols; ++j) {
      double s = static_cast<double>(j) / static_cast<double>(blk.cols);
      ring.col(blk.start + j) = a + s * (b - a);
      ring_edge[static_cast<std::size_t>(blk.start + j)] = blk.edge;
      ring_s[static_cast<std::size_t>(blk.start + j)] = s;
    }
  }

  Mesh mesh;
  mesh.nodes.resize(2, 1 + rings * total);
  mesh.nodes.col(0) = c;
  for (Index r = 1; r <= rings; ++r) {
    double f = static_cast<double>(r) / static_cast<double>(rings);
    for (Index k = 0; k < total; ++k)
      mesh.nodes.col(1 + (r - 1) * total + k) = c + f * (ring.col(k) - c);
  }
  auto node_id = [&](Index r, Index k) { return 1 + (r - 1) * total + mod_index(k, total); };

  mesh.triangles.resize(3, total + 2 * (rings - 1) * total);
  Index t = 0;
  for (Index k = 0; k < total; ++k)
    mesh.triangles.col(t++) << 0, node_id(1, k), node_id(1, k + 1);
  for (Index r = 1; r < rings; ++r)
    for (Index k = 0; k < total; ++k) {
      Index a = node_id(r, k), b = node_id(r, k + 1);
      Index up_a = node_id(r + 1, k), up_b = node_id(r + 1, k + 1);
      mesh.triangles.col(t++) << a, up_a, up_b;
      mesh.triangles.col(t++) << a, up_b, b;
    }

  mesh.on_boundary.assign(static_cast<std::size_t>(mesh.node_count()), false);
  mesh.boundary.reserve(static_cast<std::size_t>(total));
  for (Index k = 0; k < total; ++k) {
    Index kn = mod_index(k + 1, total);
    Mesh::BoundaryEdge e;
    e.a = node_id(rings, k);
    e.b = node_id(rings, kn);
    e.polygon_edge = ring_edge[static_cast<std::size_t>(k)];
    double s_next = ring_s[static_cast<std::size_t>(kn)];
    e.s_a = ring_s[static_cast<std::size_t>(k)];
    e.s_b = s_next == 0.0 ? 1.0 : s_next;
    mesh.boundary.push_back(e);
    mesh.on_boundary[static_cast<std::size_t>(e.a)] = true;
  }
  return mesh;
}

}  // namespace

Mesh mesh_polygon(const ConvexPolygon& P, double target_h) {
  if (!(target_h > 0)) throw ValidationError("element size must be positive");
  const double diam = polygon_diameter(P);
  if (!(polygon_area(P) > 1e-10 * diam * diam))
    throw ValidationError("polygon is too thin to mesh");
  // The quad diagonals can exceed the radial and tangential split size where
  // centroid rays run oblique to the edges, so shrink the split until the
  // edge bound actually holds; one or two rounds settle it.
  double split = target_h / std::numbers::sqrt2;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Mesh mesh = structured_fan(P, split, diam);
    double worst = max_edge_length(mesh);
    if (worst <= target_h * (1 + 1e-9)) return mesh;
    split *= 0.995 * target_h / worst;
  }
  throw Error("mesh sizing did not settle");
}

Mesh refine(const Mesh& mesh) {
  const Index nn = mesh.node_count();
  std::unordered_map<std::uint64_t, Index> midpoint;
  std::vector<Vector2> extra;
  auto mid = [&](Index a, Index b) {
    auto [it, fresh] = midpoint.try_emplace(edge_key(a, b, nn), nn + static_cast<Index>(extra.size()));
    if (fresh) extra.push_back(0.5 * (mesh.nodes.col(a) + mesh.nodes.col(b)));
    return it->second;
  };

  Mesh out;
  out.level = mesh.level + 1;
  const Index nt = mesh.triangle_count();
  out.triangles.resize(3, 4 * nt);
  for (Index t = 0; t < nt; ++t) {
    Index a = mesh.triangles(0, t), b = mesh.triangles(1, t), c = mesh.triangles(2, t);
    Index ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    out.triangles.col(4 * t + 0) << a, ab, ca;
    out.triangles.col(4 * t + 1) << ab, b, bc;
    out.triangles.col(4 * t + 2) << ca, bc, c;
    out.triangles.col(4 * t + 3) << ab, bc, ca;
  }

  out.nodes.resize(2, nn + static_cast<Index>(extra.size()));
  out.nodes.leftCols(nn) = mesh.nodes;
  for (std::size_t i = 0; i < extra.size(); ++i)
    out.nodes.col(nn + static_cast<Index>(i)) = extra[i];

  out.on_boundary.assign(static_cast<std::size_t>(out.node_count()), false);
  for (Index i = 0; i < nn; ++i)
    out.on_boundary[static_cast<std::size_t>(i)] = mesh.on_boundary[static_cast<std::size_t>(i)];
  out.boundary.reserve(2 * mesh.boundary.size());
  for (const Mesh::BoundaryEdge& e : mesh.boundary) {
    Index m = mid(e.a, e.b);
    out.on_boundary[static_cast<std::size_t>(m)] = true;
    double sm = 0.5 * (e.s_a + e.s_b);
    out.boundary.push_back({e.a, m, e.polygon_edge, e.s_a, sm});
    out.boundary.push_back({m, e.b, e.polygon_edge, sm, e.s_b});
  }
  return out;
}

double mesh_area(const Mesh& mesh) {
  double acc = 0;
  for (Index t = 0; t < mesh.triangle_count(); ++t) acc += triangle_area(mesh, t);
  return acc;
}

double max_edge_length(const Mesh& mesh) {
  double worst = 0;
  for (Index t = 0; t < mesh.triangle_count(); ++t)
    for (int e = 0; e < 3; ++e) {
      Vector2 a = mesh.nodes.col(mesh.triangles(e, t));
      Vector2 b = mesh.nodes.col(mesh.triangles((e + 1) % 3, t));
      worst = std::max(worst, (b - a).norm());
    }
  return worst;
}

double field_integral(const Mesh& mesh, const DiscreteField& u) {
  double acc = 0;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    double s = u.values[mesh.triangles(0, t)] + u.values[mesh.triangles(1, t)] +
               u.values[mesh.triangles(2, t)];
    acc += triangle_area(mesh, t) * s / 3.0;
  }
  return acc;
}

DiscreteField solve_poisson(const Mesh& mesh, const std::function<double(const Vector2&)>& f) {
  ReducedSystem sys = assemble(mesh, &f);
  Eigen::SimplicialLDLT<SparseMatrix> solver(sys.stiffness);
  if (solver.info() != Eigen::Success) throw Error("stiffness factorization failed");
  Vector ui = solver.solve(sys.load);
  double rel = (sys.stiffness * ui - sys.load).norm() / std::max(1.0, sys.load.norm());
  if (!(rel <= 1e-10)) throw Error("linear solve missed the residual target");
  return expand(mesh, sys.interior, ui);
}

std::vector<std::pair<double, DiscreteField>> eigs(const Mesh& mesh, int k, std::uint64_t seed) {
  if (k < 1) throw ValidationError("eigenpair count must be positive");
  ReducedSystem sys = assemble(mesh, nullptr);
  const Index ni = static_cast<Index>(sys.interior.size());
  if (ni < k) throw ValidationError("mesh too coarse for the requested eigenpair count");
  const Index block = std::min<Index>(ni, k + 5);

  Eigen::SimplicialLDLT<SparseMatrix> inverse(sys.stiffness);
  if (inverse.info() != Eigen::Success) throw Error("stiffness factorization failed");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix X(ni, block);
  for (Index j = 0; j < block; ++j)
    for (Index i = 0; i < ni; ++i) X(i, j) = gauss(rng);

  // Shift-invert subspace iteration with a Rayleigh-Ritz projection each
  // sweep; the Ritz basis comes out mass-orthonormal, which keeps the next
  // sweep well conditioned.
  Vector values = Vector::Zero(k);
  Vector previous = Vector::Constant(k, -1.0);
  for (int sweep = 0; sweep < 500; ++sweep) {
    Matrix Y = inverse.solve(sys.mass * X);
    Matrix A = Y.transpose() * (sys.stiffness * Y);
    Matrix B = Y.transpose() * (sys.mass * Y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ritz(A, B);
    if (ritz.info() != Eigen::Success) throw Error("eigenvalue projection failed");
    X = Y * ritz.eigenvectors();
    values = ritz.eigenvalues().head(k);
    bool settled = true;
    for (int j = 0; j < k; ++j)
      settled = settled && std::abs(values[j] - previous[j]) <= 1e-10 * std::max(1.0, values[j]);
    if (settled) break;
    previous = values;
  }

  std::vector<std::pair<double, DiscreteField>> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    Vector col = X.col(j);
    Index peak = 0;
    col.cwiseAbs().maxCoeff(&peak);
    if (col[peak] < 0) col = -col;
    out.emplace_back(values[j], expand(mesh, sys.interior, col));
  }
  return out;
}

BoundaryDensity boundary_gradient_density(const Mesh& mesh, const ConvexPolygon& P,
                                          const DiscreteField& u, const DiscreteField* q) {
  const Index nn = mesh.node_count();
  std::unordered_map<std::uint64_t, Index> owner;
  owner.reserve(static_cast<std::size_t>(mesh.boundary.size() * 2));
  for (Index t = 0; t < mesh.triangle_count(); ++t)
    for (int e = 0; e < 3; ++e) {
      Index a = mesh.triangles(e, t), b = mesh.triangles((e + 1) % 3, t);
      if (mesh.on_boundary[static_cast<std::size_t>(a)] &&
          mesh.on_boundary[static_cast<std::size_t>(b)])
        owner[edge_key(a, b, nn)] = t;
    }

  // 3-point Gauss rule on the unit interval.
  const double offset = std::sqrt(3.0 / 5.0) / 2.0;
  const double gauss_t[3] = {0.5 - offset, 0.5, 0.5 + offset};
  const double gauss_w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

  BoundaryDensity density;
  density.points.reserve(3 * mesh.boundary.size());
  for (const Mesh::BoundaryEdge& e : mesh.boundary) {
    auto it = owner.find(edge_key(e.a, e.b, nn));
    if (it == owner.end()) throw Error("boundary edge without an adjacent triangle");
    const Index t = it->second;
    const Index id[3] = {mesh.triangles(0, t), mesh.triangles(1, t), mesh.triangles(2, t)};
    const Vector2 x[3] = {mesh.nodes.col(id[0]), mesh.nodes.col(id[1]), mesh.nodes.col(id[2])};
    const double area = 0.5 * cross2(x[1] - x[0], x[2] - x[0]);
    Vector2 grad_u = Vector2::Zero(), grad_q = Vector2::Zero();
    for (int i = 0; i < 3; ++i) {
      Vector2 opposite = x[(i + 2) % 3] - x[(i + 1) % 3];
      Vector2 g = Vector2(-opposite.y(), opposite.x()) / (2 * area);
      grad_u += u.values[id[i]] * g;
      if (q) grad_q += q->values[id[i]] * g;
    }
    const Vector2 normal = P.edge_normal(e.polygon_edge);
    const double value =
        q ? -(grad_u.dot(normal)) * (grad_q.dot(normal)) : grad_u.squaredNorm();

    const Vector2 a = mesh.nodes.col(e.a), b = mesh.nodes.col(e.b);
    const double len = (b - a).norm();
    for (int g = 0; g < 3; ++g) {
      BoundaryQuadPoint pt;
      pt.x = a + gauss_t[g] * (b - a);
      pt.edge = e.polygon_edge;
      pt.s = e.s_a + gauss_t[g] * (e.s_b - e.s_a);
      pt.weight = gauss_w[g] * len;
      pt.value = value;
      density.points.push_back(pt);
    }
  }
  return density;
}

namespace {

// Each boundary node appears exactly once as the first endpoint of a
// boundary edge; its (polygon_edge, s) pair gives the affine weights tying
// the node velocity to the two adjacent polygon vertices.
Matrix2X transport_to_vertices(const Matrix2X& S, const Mesh& mesh, const ConvexPolygon& P) {
  const Index n = P.size();
  Matrix2X G = Matrix2X::Zero(2, n);
  for (const Mesh::BoundaryEdge& e : mesh.boundary) {
    G.col(e.polygon_edge) += (1.0 - e.s_a) * S.col(e.a);
    G.col(mod_index(e.polygon_edge + 1, n)) += e.s_a * S.col(e.a);
  }
  return G;
}

}  // namespace

Matrix2X eigenvalue_vertex_gradient(const Mesh& mesh, const ConvexPolygon& P, double lambda,
                                    const DiscreteField& u) {
  if (u.values.size() != mesh.node_count())
    throw ValidationError("field does not match the mesh");
  // Moving node a of an element with velocity V changes the element energy by
  //   area * (|grad u|^2 g_a - 2 (grad u . g_a) grad u) . V
  // and the element mass u^T M u by (u^T M u) g_a . V, with g_a the gradient
  // of the barycentric coordinate of a.  For the mass-normalized eigenvector
  // these assemble the exact derivative of the Rayleigh quotient.
  Matrix2X S = Matrix2X::Zero(2, mesh.node_count());
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const Index id[3] = {mesh.triangles(0, t), mesh.triangles(1, t), mesh.triangles(2, t)};
    const Vector2 x[3] = {mesh.nodes.col(id[0]), mesh.nodes.col(id[1]), mesh.nodes.col(id[2])};
    const double area = 0.5 * cross2(x[1] - x[0], x[2] - x[0]);
    Vector2 g[3];
    for (int i = 0; i < 3; ++i) {
      Vector2 opposite = x[(i + 2) % 3] - x[(i + 1) % 3];
      g[i] = Vector2(-opposite.y(), opposite.x()) / (2 * area);
    }
    const double uv[3] = {u.values[id[0]], u.values[id[1]], u.values[id[2]]};
    const Vector2 grad_u = uv[0] * g[0] + uv[1] * g[1] + uv[2] * g[2];
    const double sum = uv[0] + uv[1] + uv[2];
    const double mass = area / 12.0 *
                        (uv[0] * uv[0] + uv[1] * uv[1] + uv[2] * uv[2] + sum * sum);
    for (int i = 0; i < 3; ++i)
      S.col(id[i]) += area * (grad_u.squaredNorm() * g[i] - 2.0 * grad_u.dot(g[i]) * grad_u) -
                      lambda * mass * g[i];
  }
  return transport_to_vertices(S, mesh, P);
}

Matrix2X poisson_integral_vertex_gradient(const Mesh& mesh, const ConvexPolygon& P,
                                          const DiscreteField& u, const DiscreteField& z,
                                          const std::function<double(const Vector2&)>& f,
                                          const std::function<Vector2(const Vector2&)>& grad_f) {
  if (u.values.size() != mesh.node_count() || z.values.size() != mesh.node_count())
    throw ValidationError("field does not match the mesh");
  // J = w^T u with K u = F; dJ = (dw)^T u + z^T dF - z^T dK u for K z = w.
  // The load term differentiates the same edge-midpoint quadrature the solver
  // assembles, so the result is the exact derivative of the discrete value
  // under boundary-node motion.
  Matrix2X S = Matrix2X::Zero(2, mesh.node_count());
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const Index id[3] = {mesh.triangles(0, t), mesh.triangles(1, t), mesh.triangles(2, t)};
    const Vector2 x[3] = {mesh.nodes.col(id[0]), mesh.nodes.col(id[1]), mesh.nodes.col(id[2])};
    const double area = 0.5 * cross2(x[1] - x[0], x[2] - x[0]);
    Vector2 g[3];
    for (int i = 0; i < 3; ++i) {
      Vector2 opposite = x[(i + 2) % 3] - x[(i + 1) % 3];
      g[i] = Vector2(-opposite.y(), opposite.x()) / (2 * area);
    }
    Vector2 grad_u = Vector2::Zero(), grad_z = Vector2::Zero();
    for (int i = 0; i < 3; ++i) {
      grad_u += u.values[id[i]] * g[i];
      grad_z += z.values[id[i]] * g[i];
    }
    const double u_bar = (u.values[id[0]] + u.values[id[1]] + u.values[id[2]]) / 3.0;
    Vector2 mid[3];
    double fm[3], z_sum[3];
    for (int e = 0; e < 3; ++e) {
      mid[e] = 0.5 * (x[e] + x[(e + 1) % 3]);
      fm[e] = f(mid[e]);
      z_sum[e] = z.values[id[e]] + z.values[id[(e + 1) % 3]];
    }
    const double z_load = area / 6.0 * (fm[0] * z_sum[0] + fm[1] * z_sum[1] + fm[2] * z_sum[2]);
    for (int i = 0; i < 3; ++i) {
      Vector2 contribution = (area * u_bar + z_load) * g[i];
      for (int e = 0; e < 3; ++e)
        if (e == i || (e + 1) % 3 == i)
          contribution += area / 12.0 * z_sum[e] * grad_f(mid[e]);
      contribution -= area * (grad_z.dot(grad_u) * g[i] - g[i].dot(grad_u) * grad_z -
                              g[i].dot(grad_z) * grad_u);
      S.col(id[i]) += contribution;
    }
  }
  return transport_to_vertices(S, mesh, P);
}

}  // namespace convopt::fem
