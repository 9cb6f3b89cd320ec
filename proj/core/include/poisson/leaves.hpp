#pragma once

// Symplectic-leaf tangents, F-regularity and F-compatible transversals.

#include <string>
#include <vector>

#include "poisson/systems.hpp"

namespace poisson {

/// Submanifold {h_1 = ... = h_k = 0} through a base point.
///
/// Coordinates on the transversal are the ambient coordinates left over
/// after removing the pivot columns of dh at the base point.
class Transversal {
 public:
  Transversal() = default;
  Transversal(std::string name, std::vector<Expr> defining, Point base);

  const std::string& name() const { return name_; }
  const ChartPtr& chart() const { return base_.chart; }
  const std::vector<Expr>& defining() const { return defining_; }
  const Point& base() const { return base_; }
  std::size_t codim() const { return defining_.size(); }
  std::size_t dim() const { return chart()->size() - codim(); }

  Vec residual(std::span<const double> x) const;
  /// k x n Jacobian of the defining functions.
  Mat jacobian(std::span<const double> x) const;
  bool contains(std::span<const double> x, double tol = 1e-10) const;

  /// Ambient indices used as coordinates on the transversal.
  const std::vector<int>& coordinates() const { return free_; }
  const std::vector<int>& pivots() const { return pivots_; }
  std::vector<std::string> coordinate_names() const;

  /// n x dim basis of the tangent space whose columns are d/du_c in
  /// transversal coordinates.
  Mat tangent_basis(std::span<const double> x) const;
  /// Point of the transversal with the given free coordinates (Newton on
  /// the pivot coordinates, started from `guess` or the base point).
  Vec lift(const Vec& u, const Vec* guess = nullptr) const;
  Vec coordinates_of(std::span<const double> x) const;

  /// Newton projection of `x` onto the transversal along the row space of dh.
  Vec project(const Vec& x) const;

 private:
  std::string name_;
  std::vector<Expr> defining_;
  std::vector<std::vector<Expr>> gradient_;
  Point base_;
  std::vector<int> pivots_, free_;
};

/// Orthonormal basis of the leaf tangent (column space of pi(s)).
Mat leaf_tangent_at(const Bivector& pi, const Point& s);

struct RegularityReport {
  int r_prime = 0;
  int intersection_dim = 0;          // principal angles
  int intersection_dim_stacked = 0;  // kernel of [dF; ker(pi)^T]
  int restricted_rank = 0;           // rank of dF on the leaf tangent
  bool f_regular = false;
};

/// Throws PreconditionError("regular-point") when dF(s) is rank deficient.
RegularityReport f_regular_at(const Bivector& pi, const FunctionFamily& f, const Point& s);

struct CompatibilityReport {
  bool compatible = false;
  int r = 0, r_prime = 0;
  std::vector<int> restricted_ranks;  // rank of dF on T_mT per sample
  std::vector<int> leaf_dims;         // dim T_mT - restricted rank
};

/// Checks transversality at the base point (PreconditionError
/// "transversal") and that F restricts to a regular foliation with leaves of
/// dimension r - r' at every sample (PreconditionError "on-transversal"
/// when a sample is off T).
CompatibilityReport compatible_transversal_check(const Bivector& pi, const FunctionFamily& f,
                                                 const Transversal& t, const std::vector<Point>& samples);

struct CompatibleTransversal {
  Transversal transversal;
  std::vector<int> pivots;     // indices into F of f_1..f_r'
  std::vector<Expr> conjugates;  // g_1..g_r', {f_i, g_j}(s) = delta_ij
};

/// Level set {f_i - f_i(s) = a_i, g_j = b_j} with affine conjugates g_j.
/// Empty offsets mean zero. Throws PreconditionError("f-regular").
CompatibleTransversal build_compatible_transversal(const Bivector& pi, const FunctionFamily& f, const Point& s,
                                                   const std::vector<double>& a = {},
                                                   const std::vector<double>& b = {},
                                                   const std::string& name = "T");

}  // namespace poisson
