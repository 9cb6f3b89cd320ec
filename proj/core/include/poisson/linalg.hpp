#pragma once

// Small dense linear-algebra helpers shared by the numeric modules.

#include <Eigen/Dense>

#include <vector>

namespace poisson {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

namespace linalg {

inline constexpr double kRankTolerance = 1e-9;

// Tolerances below are relative to max(largest singular value or entry,
// `scale`). Pass the norm of an unprojected factor as `scale` when `a` is a
// projection that may be numerically zero.

/// Rank from singular values above the relative tolerance.
int rank(const Mat& a, double rel_tol = kRankTolerance, double scale = 0.0);

/// Rank of an antisymmetric matrix by paired-pivot elimination; always even.
/// Pivots below `rel_tol` times the largest entry count as zero.
int skew_rank(const Mat& a, double rel_tol = kRankTolerance, double scale = 0.0);

/// Orthonormal basis (columns) of the null space of `a`.
Mat kernel(const Mat& a, double rel_tol = kRankTolerance, double scale = 0.0);

/// Orthonormal basis (columns) of the column space of `a`.
Mat column_space(const Mat& a, double rel_tol = kRankTolerance, double scale = 0.0);

/// Cosines of the principal angles between span(u) and span(v) (orthonormal
/// column inputs), sorted decreasing.
Vec principal_cosines(const Mat& u, const Mat& v);

/// Number of principal cosines above 1 - `threshold`.
int intersection_dim(const Mat& u, const Mat& v, double threshold = 1e-8);

/// Rows of `a` picked greedily by largest residual norm after projecting out
/// the rows already chosen; ties go to the lowest index. Stops when the best
/// residual drops below `rel_tol` times the largest row norm, or after `limit`.
std::vector<int> pivot_rows(const Mat& a, int limit = -1, double rel_tol = 1e-8, double scale = 0.0);

/// Orthonormal completion: `count` unit vectors orthogonal to span(a) built
/// from coordinate axes, picking the axis with the largest residual each time
/// (lowest index on ties). Returned as columns.
Mat axis_complement(const Mat& a, int count);

/// Pfaffian of an even-dimensional antisymmetric matrix (expansion along the
/// first row; intended for small sizes).
double pfaffian(const Mat& a);

/// Central finite-difference Jacobian of `f` at `x`.
template <class F>
Mat fd_jacobian(F&& f, const Vec& x, double h) {
  Vec y0 = f(x);
  Mat j(y0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vec xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    j.col(k) = (f(xp) - f(xm)) / (2 * h);
  }
  return j;
}

}  // namespace linalg
}  // namespace poisson
