#pragma once

// Poisson bivectors, brackets and Hamiltonian vector fields.
//
// Sign convention used throughout the library:
//
//     {f, g} = sum_{i<j} pi_ij (d_i f d_j g - d_j f d_i g),
//
// so a term a ∂x_i∧∂x_j (i<j) means {x_i, x_j} = a, and the Hamiltonian
// vector field of f acts by X_f[g] = {f, g}.

#include <string>
#include <vector>

#include "poisson/expr.hpp"
#include "poisson/linalg.hpp"

namespace poisson {

/// Antisymmetric matrix of expressions over a chart.
class Bivector {
 public:
  Bivector() = default;
  explicit Bivector(ChartPtr chart);

  const ChartPtr& chart() const { return chart_; }
  std::size_t dim() const { return chart_->size(); }

  /// pi_ij; antisymmetric extension for i > j, zero on the diagonal.
  Expr entry(std::size_t i, std::size_t j) const;
  /// Set pi_ij (and implicitly pi_ji = -pi_ij). Requires i != j.
  void set(std::size_t i, std::size_t j, const Expr& value);
  void set(std::string_view a, std::string_view b, const Expr& value);

  /// Numeric matrix with {f,g} = df^T M dg.
  Mat matrix(std::span<const double> x) const;
  Mat matrix(const Point& m) const { return matrix(m.span()); }

  /// True only after a jacobiator call that returned all zeros.
  bool is_poisson() const { return poisson_checked_; }
  void mark_poisson(bool value) { poisson_checked_ = value; }

 private:
  ChartPtr chart_;
  std::vector<Expr> upper_;  // row-major i<j
  bool poisson_checked_ = false;
  std::size_t slot(std::size_t i, std::size_t j) const;
};

struct VectorField {
  ChartPtr chart;
  std::vector<Expr> components;

  /// Apply as a derivation: X[g] = sum_k X^k d_k g.
  Expr apply(const Expr& g) const;
  Vec evaluate(std::span<const double> x) const;
  bool is_zero() const;
};

/// Commutator [X, Y] = X Y - Y X of vector fields.
VectorField lie_bracket(const VectorField& x, const VectorField& y);

/// Map between charts given by one expression per target coordinate.
struct SymbolicMap {
  ChartPtr source;
  ChartPtr target;
  std::vector<Expr> components;  // over `source`, one per target coordinate

  static SymbolicMap identity(const ChartPtr& chart);

  Vec apply(std::span<const double> x) const;
  /// Numeric Jacobian d(target)/d(source) from exact derivatives.
  Mat jacobian(std::span<const double> x) const;
  /// Exact Jacobian entries.
  std::vector<std::vector<Expr>> symbolic_jacobian() const;
  /// Pullback f -> f o this, for f over `target`.
  Expr pullback(const Expr& f) const;
  /// (this o inner)(x) = this(inner(x)).
  SymbolicMap after(const SymbolicMap& inner) const;
};

Expr bracket(const Bivector& pi, const Expr& f, const Expr& g);

VectorField hamiltonian_vf(const Bivector& pi, const Expr& f);

/// One Jacobiator expression for a triple of coordinates.
struct JacobiatorTerm {
  std::size_t i, j, k;
  Expr value;
};

/// {x_i,{x_j,x_k}} + cyclic for every i<j<k. Marks `pi` as Poisson when all
/// entries vanish.
std::vector<JacobiatorTerm> jacobiator(Bivector& pi);
std::vector<JacobiatorTerm> jacobiator(const Bivector& pi);
bool all_zero(const std::vector<JacobiatorTerm>& terms);

int rank_at(const Bivector& pi, const Point& m);

/// J pi(m) J^T with J the Jacobian of `phi` at m. Throws NumericalError when
/// J is singular.
Mat pushforward(const Bivector& pi, const SymbolicMap& phi, const Point& m);

/// Block bivector on the concatenated chart. Throws on shared names.
Bivector direct_product(const Bivector& a, const Bivector& b);

}  // namespace poisson
