#pragma once

// Split charts of integrable systems and non-split witnesses from
// transversal comparison.

#include <optional>
#include <string>

#include "poisson/dirac.hpp"
#include "poisson/leaves.hpp"
#include "poisson/normalform.hpp"

namespace poisson {

/// Chart x = center + A u; `a` columns are the chart axes in the order
/// (p_1, q_1, ..., p_r, q_r, z).
NumericChart affine_chart(const Bivector& pi, const Point& center, int r, const Mat& a);

/// Ambient coordinates reordered as (p_1, q_1, ..., z) by name.
NumericChart coordinate_chart(const Bivector& pi, const Point& center, const std::vector<std::string>& order, int r);

struct SplitCheck {
  bool split = false;
  bool form = false;  // bivector in split form at the grid points
  bool spans = false;  // dF in span(dp_i, dz_1..dz_k) at the grid points
  int generators = 0;  // k = #F - r
  double form_residual = 0;
  double span_residual = 0;  // max relative residual of a dF row
  ChartDiagnostics diagnostics;
};

SplitCheck verify_split_chart(const Bivector& pi, const FunctionFamily& f, const NumericChart& chart,
                              const VerifyOptions& options = {});

struct SplitVerdict {
  SplitStatus status = SplitStatus::inconclusive;
  int r_prime = 0;
  std::optional<NumericChart> chart;
  std::optional<SplitCheck> check;
  std::optional<ComparisonReport> comparison;
  std::vector<std::string> transversals;
  std::string note;
};

struct SplitOptions {
  std::vector<double> first_offset;   // A for the first transversal (default 0)
  std::vector<double> second_offset;  // default: unit along the first pivot
  ComparisonOptions comparison;
  ChartOptions chart;
};

/// Semi-decision: SPLIT-WITNESS from a foliated splitting chart,
/// UNSPLIT-WITNESS from two transversals with different invariants, else
/// INCONCLUSIVE. Throws PreconditionError("f-regular").
SplitVerdict split_test(const Bivector& pi, const FunctionFamily& f, const Point& s, const SplitOptions& options = {});

struct SplitEquivariantChart {
  EquivariantChart equivariant;
  SplitCheck check;
  FunctionFamily p;  // invariant members of the system used as p_i
};

/// Equivariant chart whose (p, z_1..z_k) generate the foliation. Requires a
/// Poisson action fixing the leaf through m pointwise and preserving the
/// foliation. Throws PreconditionError ("fixed-leaf", "invariant-foliation",
/// "split").
SplitEquivariantChart construct_split_equivariant_chart(const Bivector& pi, const FunctionFamily& f,
                                                        const GroupAction& g, const Point& m,
                                                        const EquivariantOptions& options = {});

}  // namespace poisson
