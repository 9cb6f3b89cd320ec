#pragma once

// Finite (and quadrature-sampled circle) group actions: verification,
// Poisson invariance, Haar averaging and Bochner linearization.

#include <string>
#include <vector>

#include "poisson/geometry.hpp"

namespace poisson {

class GroupAction {
 public:
  enum class Kind { finite, circle };

  GroupAction() = default;

  /// `table[g][h]` is the index of the product gh. Throws Error when the
  /// table is not a group or the maps do not match the chart.
  static GroupAction finite(ChartPtr chart, std::vector<std::string> elements, std::vector<std::vector<int>> table,
                            std::vector<SymbolicMap> maps);
  /// Cyclic group of rotations by multiples of 2π/order.
  static GroupAction cyclic(ChartPtr chart, const Mat& generator_matrix, int order, std::string prefix = "r");
  static GroupAction trivial(ChartPtr chart);
  /// Circle acting linearly by exp(θ K), sampled at `nodes` equispaced angles
  /// (composite trapezoid rule). Coefficients are rounded to a 1e-12 grid.
  static GroupAction circle(ChartPtr chart, const Mat& k, int nodes = 64);

  Kind kind() const { return kind_; }
  const ChartPtr& chart() const { return chart_; }
  std::size_t order() const { return maps_.size(); }
  const std::string& element(std::size_t g) const { return elements_[g]; }
  const std::vector<std::string>& elements() const { return elements_; }
  const SymbolicMap& map(std::size_t g) const { return maps_[g]; }
  const std::vector<SymbolicMap>& maps() const { return maps_; }
  int product(int g, int h) const { return table_[g][h]; }
  int identity() const { return identity_; }
  int inverse(int g) const { return inverse_[g]; }
  std::size_t index_of(std::string_view name) const;

 private:
  Kind kind_ = Kind::finite;
  ChartPtr chart_;
  std::vector<std::string> elements_;
  std::vector<std::vector<int>> table_;
  std::vector<SymbolicMap> maps_;
  int identity_ = 0;
  std::vector<int> inverse_;
};

struct ActionCheck {
  bool ok = false;
  double residual = 0.0;
};

/// Identity acts trivially and map(g)∘map(h) = map(gh) at the samples (1e-9).
ActionCheck verify_action(const GroupAction& g, const std::vector<Point>& samples, double tol = 1e-9);

/// pushforward(pi, map(g), m) = pi(map(g)(m)) at the samples (1e-8).
ActionCheck preserves_poisson(const GroupAction& g, const Bivector& pi, const std::vector<Point>& samples,
                              double tol = 1e-8);

/// (1/|G|) sum_g g*f. Throws ClassError if a pullback leaves the class.
Expr haar_average(const GroupAction& g, const Expr& f);

bool is_invariant(const GroupAction& g, const Expr& f);

struct LinearityCertificate {
  std::vector<Mat> matrices;         // A(g), one per element
  double homomorphism_residual = 0;  // max |A(gh) - A(g)A(h)|
  double conjugation_residual = 0;   // max |phi(rho_g x) - A(g) phi(x)| at samples
  bool ok = false;
};

struct BochnerChart {
  SymbolicMap phi;  // chart -> chart, phi(m) = 0, D phi(m) = I
  LinearityCertificate certificate;
  bool exact = false;  // A(g) and phi have exact rational coefficients
};

/// phi = (1/|G|) sum_g A(g)^{-1} (rho_g - m). Throws PreconditionError
/// ("fixed-point") when m is not fixed; the certificate is checked on
/// `samples` near m.
BochnerChart bochner_linearize(const GroupAction& g, const Point& m, const std::vector<Point>& samples);

/// Jacobians of the element maps at a fixed point.
std::vector<Mat> linear_parts(const GroupAction& g, const Point& m);
double homomorphism_residual(const GroupAction& g, const std::vector<Mat>& a);

}  // namespace poisson
