#pragma once

// Flows of vector fields by adaptive Runge-Kutta-Fehlberg 7(8).

#include <functional>
#include <limits>

#include "poisson/geometry.hpp"

namespace poisson {

class FlowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct FlowOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  /// Max sup-norm distance from the starting point before FlowError.
  double max_excursion = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 100000;
};

using FieldFn = std::function<Vec(const Vec&)>;

/// Time-t flow of an autonomous field. t may be negative.
Vec flow(const FieldFn& field, const Vec& x0, double t, const FlowOptions& options = {});

/// Symbolic field compiled for fast evaluation.
class CompiledField {
 public:
  explicit CompiledField(const VectorField& x);
  Vec operator()(const Vec& x) const;
  /// Exact Jacobian d X^k / d x_j.
  Mat jacobian(const Vec& x) const;

 private:
  std::vector<CompiledExpr> components_;
  std::vector<std::vector<CompiledExpr>> derivatives_;
};

Point flow(const VectorField& x, const Point& m, double t, const FlowOptions& options = {});

}  // namespace poisson
