#pragma once

// Involutive families and Liouville integrability.

#include <string>
#include <vector>

#include "poisson/geometry.hpp"

namespace poisson {

/// Ordered tuple (f_1, ..., f_s) of functions over one chart.
class FunctionFamily {
 public:
  FunctionFamily() = default;
  FunctionFamily(ChartPtr chart, std::vector<Expr> functions, std::vector<std::string> names = {});

  const ChartPtr& chart() const { return chart_; }
  std::size_t size() const { return functions_.size(); }
  const Expr& operator[](std::size_t i) const { return functions_[i]; }
  const std::vector<Expr>& functions() const { return functions_; }
  const std::string& name(std::size_t i) const { return names_[i]; }

  /// s x n numeric Jacobian.
  Mat jacobian(std::span<const double> x) const;

 private:
  ChartPtr chart_;
  std::vector<Expr> functions_;
  std::vector<std::string> names_;
};

struct InvolutionFailure {
  std::size_t i, j;
  Expr bracket;
};

struct InvolutivityResult {
  bool involutive = true;
  std::vector<InvolutionFailure> failures;
};

InvolutivityResult is_involutive(const Bivector& pi, const FunctionFamily& f);

int independence_rank_at(const FunctionFamily& f, const Point& m);

struct IntegrabilityReport {
  bool involutive = false;
  int independence_rank = 0;  // minimum over the samples
  bool independent = false;
  int n = 0, s = 0, r = 0;
  int max_rank = 0;  // 2r, the largest sampled rank of pi
  bool liouville = false;
  std::vector<InvolutionFailure> failures;
};

IntegrabilityReport liouville_check(const Bivector& pi, const FunctionFamily& f, const std::vector<Point>& sample);

/// Orthonormal basis of the kernel of dF at m (tangent space of the fiber).
/// Throws PreconditionError("regular-point") when rank dF(m) < s.
Mat foliation_tangent_at(const FunctionFamily& f, const Point& m);

}  // namespace poisson
