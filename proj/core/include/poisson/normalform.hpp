#pragma once

// Numeric splitting charts (p_1, q_1, ..., p_r, q_r, z) around a point, in
// which the bivector reads sum ∂p_i∧∂q_i + g(z), and their equivariant and
// foliated variants.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "poisson/flow.hpp"
#include "poisson/groups.hpp"
#include "poisson/systems.hpp"

namespace poisson {

struct ChartOptions {
  /// Half-width (sup norm, chart coordinates) of the domain on which the
  /// chart is evaluated; halved while verification hits a flow failure.
  double box = 0.25;
  FlowOptions flow{1e-12, 1e-12, 4.0};
  int newton_iterations = 50;
  double newton_tol = 1e-10;
  /// Verify on construction and store the diagnostics in the chart.
  bool verify = true;
};

struct VerifyOptions {
  double half_width = 0.1;
  int points_per_axis = 5;
  double fd_step = 1e-4;
  double tolerance = 1e-6;
  /// Also check inverse(forward(u)) = u at every grid point.
  bool roundtrip = true;
};

struct ChartDiagnostics {
  int grid_points = 0;
  double half_width = 0;
  double pp = 0;  // max |{p_i,p_j}|
  double pq = 0;  // max |{p_i,q_j} - δ_ij|
  double qq = 0;
  double pz = 0;
  double qz = 0;
  double dg_dp = 0;  // max |∂g/∂p_i| along grid lines
  double dg_dq = 0;
  double roundtrip = 0;
  double max_residual = 0;
  double center_z_norm = 0;  // |g(0)|, computed without differencing
  int rank_at_center = 0;
  bool rank_criterion = false;  // (|g(0)| <= 1e-9) == (rank pi(m) == 2r)
  bool passed = false;
};

/// Chart u = (p_1, q_1, ..., p_r, q_r, z_1, ..., z_s) -> x, with u = 0 at the
/// center. Brackets in the chart: {p_i, q_j} = δ_ij (X_{p_i}[q_j] = δ_ij).
class NumericChart {
 public:
  struct Impl {
    virtual ~Impl() = default;
    virtual Vec forward(const Vec& u) const = 0;
    virtual Vec inverse(const Vec& x) const = 0;
    /// g(0), the z-block of the bracket matrix at the center.
    virtual Mat center_z_block() const = 0;
  };

  NumericChart() = default;
  NumericChart(Point center, int r, std::shared_ptr<const Impl> impl);

  const Point& center() const { return center_; }
  int r() const { return r_; }
  int s() const { return static_cast<int>(center_.size()) - 2 * r_; }
  std::size_t dim() const { return center_.size(); }
  std::vector<std::string> coordinate_names() const;

  Vec forward(const Vec& u) const;
  Vec inverse(const Vec& x) const;
  Mat center_z_block() const { return impl_->center_z_block(); }
  /// Bracket matrix of the chart coordinates at u (finite-difference Jacobian).
  Mat bracket_matrix(const Bivector& pi, const Vec& u, double h = 1e-4) const;

  double box = 0.25;
  ChartDiagnostics diagnostics;

 private:
  Point center_;
  int r_ = 0;
  std::shared_ptr<const Impl> impl_;
};

ChartDiagnostics verify_chart(const Bivector& pi, const NumericChart& chart, const VerifyOptions& options = {});

/// Splitting chart for an involutive family P with X_{p_i}(m) independent.
/// P is shifted to vanish at m. Throws PreconditionError ("involutive",
/// "independent-fields") and NumericalError.
NumericChart construct_cjl_chart(const Bivector& pi, const FunctionFamily& p, const Point& m,
                                 const ChartOptions& options = {});

struct EquivariantChart {
  NumericChart chart;
  bool poisson_action = false;     // precondition: every element map is Poisson
  double poisson_residual = 0;
  bool invariant_functions = false;
  std::vector<Mat> action_matrices;  // constant matrices of the action in the chart
  double action_residual = 0;        // max |chart^-1 ρ_g chart(u) - A_g u| at samples
  double homomorphism_residual = 0;
  bool linear = false;
};

struct EquivariantOptions {
  ChartOptions chart;
  /// When false the Poisson-action precondition is measured and reported
  /// instead of enforced.
  bool require_poisson_action = true;
  int action_samples = 20;
  double action_half_width = 0.1;
  std::uint64_t seed = 0;
};

/// G-equivariant splitting chart: the q_i are Haar averages and the z-part
/// is linearized by a numeric Bochner map. Requires m fixed, P invariant and
/// (unless disabled) a Poisson action. Throws PreconditionError
/// ("fixed-point", "invariant-functions", "poisson-action").
EquivariantChart construct_equivariant_chart(const Bivector& pi, const FunctionFamily& p, const GroupAction& g,
                                             const Point& m, const EquivariantOptions& options = {});

/// Linearize the group action on the z-part of a chart whose p, q are
/// invariant (numeric Bochner averaging unless already linear), verify the
/// result and measure the action in the new chart.
EquivariantChart linearize_action(const Bivector& pi, NumericChart chart, const GroupAction& g,
                                  const EquivariantOptions& options = {});

/// Replace the z-coordinates by restrictions of members of F to the p = q = 0
/// slice (pivoted by independence at the center), completed by coordinate
/// axes. `count` restrictions are used; the split form of the chart is kept.
NumericChart foliate_chart(const NumericChart& chart, const FunctionFamily& f, int count);

/// Commutation defect |Φ_f^s Φ_g^t(x) - Φ_g^t Φ_f^s(x)| of two Hamiltonian flows.
double flow_commutator(const Bivector& pi, const Expr& f, const Expr& g, const Point& x, double s, double t,
                       const FlowOptions& options = {});

}  // namespace poisson
