#pragma once

#include <Eigen/SparseCore>

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "convopt/types.hpp"

namespace convopt {

enum class ConstraintFamily {
  kConvexity,
  kWidthLower,
  kWidthUpper,
  kWidthEqual,
  kSymmetry,
  kInclusionUpper,
  kInclusionLower,
  kCustom,
};

std::string family_name(ConstraintFamily family);

// Row provenance: which family produced the row and at which grid index, so
// infeasibility reports can name the culprit.
struct RowTag {
  ConstraintFamily family = ConstraintFamily::kCustom;
  Index index = 0;
};

// Sparse linear constraints on a parameter vector: inequality rows a.x >= lb
// and equality rows e.x = rhs.  Rows are accumulated as triplets and
// materialized into row-major sparse matrices on demand.
struct LinearConstraintSet {
  using Coeff = std::pair<Index, double>;
  using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  Index dim = 0;

  std::vector<Eigen::Triplet<double>> ineq_coeffs;
  std::vector<double> ineq_lb;
  std::vector<RowTag> ineq_tags;

  std::vector<Eigen::Triplet<double>> eq_coeffs;
  std::vector<double> eq_rhs;
  std::vector<RowTag> eq_tags;

  explicit LinearConstraintSet(Index dimension = 0) : dim(dimension) {}

  Index num_ineq() const { return static_cast<Index>(ineq_lb.size()); }
  Index num_eq() const { return static_cast<Index>(eq_rhs.size()); }

  void add_ineq(std::initializer_list<Coeff> coeffs, double lb, RowTag tag);
  void add_eq(std::initializer_list<Coeff> coeffs, double rhs, RowTag tag);

  // Append all rows of another set over the same parameter vector.
  void merge(const LinearConstraintSet& other);

  SparseRowMatrix ineq_matrix() const;
  SparseRowMatrix eq_matrix() const;
  Vector ineq_lower() const;
  Vector eq_values() const;

  // Worst violation (0 when feasible) and, optionally, the tag of the row
  // attaining it.
  double max_violation(const Vector& x, RowTag* worst = nullptr) const;
};

}  // namespace convopt
