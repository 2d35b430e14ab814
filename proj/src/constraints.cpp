#include "convopt/constraints.hpp"

namespace convopt {

std::string family_name(ConstraintFamily family) {
  switch (family) {
    case ConstraintFamily::kConvexity:
      return "convexity";
    case ConstraintFamily::kWidthLower:
      return "width_lower";
    case ConstraintFamily::kWidthUpper:
      return "width_upper";
    case ConstraintFamily::kWidthEqual:
      return "width_equal";
    case ConstraintFamily::kSymmetry:
      return "symmetry";
    case ConstraintFamily::kInclusionUpper:
      return "inclusion_upper";
    case ConstraintFamily::kInclusionLower:
      return "inclusion_lower";
    case ConstraintFamily::kCustom:
      return "custom";
  }
  return "unknown";
}

void LinearConstraintSet::add_ineq(std::initializer_list<Coeff> coeffs, double lb, RowTag tag) {
  const int row = static_cast<int>(ineq_lb.size());
  for (const auto& [col, val] : coeffs)
    ineq_coeffs.emplace_back(row, static_cast<int>(col), val);
  ineq_lb.push_back(lb);
  ineq_tags.push_back(tag);
}

void LinearConstraintSet::add_eq(std::initializer_list<Coeff> coeffs, double rhs, RowTag tag) {
  const int row = static_cast<int>(eq_rhs.size());
  for (const auto& [col, val] : coeffs)
    eq_coeffs.emplace_back(row, static_cast<int>(col), val);
  eq_rhs.push_back(rhs);
  eq_tags.push_back(tag);
}

void LinearConstraintSet::merge(const LinearConstraintSet& other) {
  if (dim == 0) dim = other.dim;
  if (other.dim != dim) throw ValidationError("constraint sets have mismatched dimensions");
  const int ineq_base = static_cast<int>(ineq_lb.size());
  for (const auto& t : other.ineq_coeffs)
    ineq_coeffs.emplace_back(t.row() + ineq_base, t.col(), t.value());
  ineq_lb.insert(ineq_lb.end(), other.ineq_lb.begin(), other.ineq_lb.end());
  ineq_tags.insert(ineq_tags.end(), other.ineq_tags.begin(), other.ineq_tags.end());
  const int eq_base = static_cast<int>(eq_rhs.size());
  for (const auto& t : other.eq_coeffs)
    eq_coeffs.emplace_back(t.row() + eq_base, t.col(), t.value());
  eq_rhs.insert(eq_rhs.end(), other.eq_rhs.begin(), other.eq_rhs.end());
  eq_tags.insert(eq_tags.end(), other.eq_tags.begin(), other.eq_tags.end());
}

LinearConstraintSet::SparseRowMatrix LinearConstraintSet::ineq_matrix() const {
  SparseRowMatrix A(num_ineq(), dim);
  A.setFromTriplets(ineq_coeffs.begin(), ineq_coeffs.end());
  return A;
}

LinearConstraintSet::SparseRowMatrix LinearConstraintSet::eq_matrix() const {
  SparseRowMatrix E(num_eq(), dim);
  E.setFromTriplets(eq_coeffs.begin(), eq_coeffs.end());
  return E;
}

Vector LinearConstraintSet::ineq_lower() const {
  return Eigen::Map<const Vector>(ineq_lb.data(), num_ineq());
}

Vector LinearConstraintSet::eq_values() const {
  return Eigen::Map<const Vector>(eq_rhs.data(), num_eq());
}

double LinearConstraintSet::max_violation(const Vector& x, RowTag* worst) const {
  double v = 0;
  if (num_ineq() > 0) {
    Vector r = ineq_lower() - ineq_matrix() * x;
    Index i = 0;
    double vi = r.maxCoeff(&i);
    if (vi > v) {
      v = vi;
      if (worst) *worst = ineq_tags[static_cast<size_t>(i)];
    }
  }
  if (num_eq() > 0) {
    Vector r = (eq_matrix() * x - eq_values()).cwiseAbs();
    Index i = 0;
    double vi = r.maxCoeff(&i);
    if (vi > v) {
      v = vi;
      if (worst) *worst = eq_tags[static_cast<size_t>(i)];
    }
  }
  return v;
}

}  // namespace convopt
