#pragma once

// Induced Poisson-Dirac structures on transversals, pointwise gauge
// transformations, and comparison of induced integrable systems.

#include <cstdint>
#include <string>
#include <vector>

#include "poisson/leaves.hpp"

namespace poisson {

/// Antisymmetric 2-form B = sum_{i<j} B_ij dx_i ^ dx_j.
class TwoForm {
 public:
  TwoForm() = default;
  explicit TwoForm(ChartPtr chart) : coefficients_(std::move(chart)) {}

  const ChartPtr& chart() const { return coefficients_.chart(); }
  Expr entry(std::size_t i, std::size_t j) const { return coefficients_.entry(i, j); }
  void set(std::size_t i, std::size_t j, const Expr& v) { coefficients_.set(i, j, v); }
  void set(std::string_view a, std::string_view b, const Expr& v) { coefficients_.set(a, b, v); }
  Mat matrix(std::span<const double> x) const { return coefficients_.matrix(x); }
  Mat matrix(const Point& m) const { return coefficients_.matrix(m); }

 private:
  Bivector coefficients_;
};

/// Induced bivector in the transversal's coordinates (Transversal::coordinates).
/// Throws PreconditionError("poisson-dirac") when T_mM != T_mT + pi#(N°).
Mat induced_bivector_at(const Bivector& pi, const Transversal& t, const Point& m);

struct InducedStructure {
  std::string transversal;
  std::vector<std::string> coordinates;
  std::vector<Point> points;
  std::vector<Mat> matrices;
  std::vector<int> ranks;
  std::vector<int> generators;  // F members whose restrictions are independent at the base point
};

InducedStructure induce(const Bivector& pi, const Transversal& t, const FunctionFamily& f,
                        const std::vector<Point>& points);

/// Induced bracket {f, g}_T(m) by the lambda correction: X_f - sum lambda_k
/// X_{phi_k} is made tangent to T, where phi_k are combinations of F whose
/// differentials vanish on T_mT. Throws NumericalError when no lambda exists.
double bracket_on_transversal(const Bivector& pi, const Transversal& t, const FunctionFamily& f, const Expr& a,
                              const Expr& b, const Point& m);

/// Pi_B = Pi (I + B Pi)^{-1}. Throws NumericalError when I + B Pi is singular.
Mat gauge_transform(const Mat& pi, const Mat& b);
Mat gauge_transform_at(const Bivector& pi, const TwoForm& b, const Point& m);

/// Whether the rank-drop locus of the induced bivector is tangent to the
/// induced foliation, at the singular points that were found.
enum class Tangency { none, tangent, not_tangent };
std::string to_string(Tangency t);

struct SingularSample {
  std::vector<double> coordinates;  // transversal coordinates
  int rank = 0;
  double misalignment = 0;  // max |normal . k| over unit foliation directions k
};

struct TransversalInvariant {
  std::string transversal;
  int generic_rank = 0;
  Tangency tangency = Tangency::none;
  std::vector<SingularSample> singular;
};

enum class SplitStatus { split_witness, unsplit_witness, inconclusive };
std::string to_string(SplitStatus s);

struct ComparisonReport {
  TransversalInvariant first, second;
  SplitStatus status = SplitStatus::inconclusive;
};

struct ComparisonOptions {
  int starts = 12;             // Newton starts per transversal
  double half_width = 0.25;    // sampling box around the base point
  double tolerance = 1e-6;     // tangency tolerance
  std::uint64_t seed = 0;
};

TransversalInvariant transversal_invariant(const Bivector& pi, const FunctionFamily& f, const Transversal& t,
                                           const ComparisonOptions& options = {});

ComparisonReport compare_transversals(const Bivector& pi, const FunctionFamily& f, const Transversal& t1,
                                      const Transversal& t2, const ComparisonOptions& options = {});

}  // namespace poisson
