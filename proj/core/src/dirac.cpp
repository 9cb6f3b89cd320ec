#include "poisson/dirac.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace poisson {

namespace {

Vec as_vec(const Point& m) { return Eigen::Map<const Vec>(m.values.data(), m.values.size()); }

Vec gradient(const Expr& f, std::span<const double> x) {
  Vec g(f.nvars());
  for (std::size_t k = 0; k < f.nvars(); ++k) g[k] = f.derivative(k).evaluate(x);
  return g;
}

// Number of singular values above an absolute threshold.
int numeric_rank_abs(const Mat& a, double abs_tol) {
  if (a.size() == 0) return 0;
  const Vec sv = Eigen::JacobiSVD<Mat>(a).singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > abs_tol) ++r;
  return r;
}

void subsets(int n, int k, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < n; ++i) {
    cur.push_back(i);
    subsets(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

Mat principal(const Mat& a, const std::vector<int>& idx) {
  Mat s(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) s(i, j) = a(idx[i], idx[j]);
  return s;
}

}  // namespace

Mat induced_bivector_at(const Bivector& pi, const Transversal& t, const Point& m) {
  if (!same_chart(pi.chart(), t.chart()) || !same_chart(pi.chart(), m.chart)) throw ChartMismatch();
  if (!t.contains(m.span())) throw PreconditionError("on-transversal", "point is not on " + t.name());
  const Mat pm = pi.matrix(m);
  if (t.codim() == 0) return pm;
  const Index n = static_cast<Index>(pi.dim());
  const Index d = static_cast<Index>(t.dim());
  const Mat v = t.tangent_basis(m.span());
  const Mat w = pm * t.jacobian(m.span()).transpose();
  Mat vw(n, n);
  vw << v, w;
  const Eigen::FullPivLU<Mat> lu(vw);
  if (numeric_rank_abs(vw / std::max(1.0, vw.norm()), 1e-10) < n)
    throw PreconditionError("poisson-dirac", "tangent space of " + t.name() + " and pi#(N°) do not span");
  const Mat inv = lu.inverse();
  const Mat at = inv.topRows(d);
  const Mat r = at * pm * at.transpose();
  return 0.5 * (r - r.transpose());
}

InducedStructure induce(const Bivector& pi, const Transversal& t, const FunctionFamily& f,
                        const std::vector<Point>& points) {
  InducedStructure out;
  out.transversal = t.name();
  out.coordinates = t.coordinate_names();
  for (const auto& m : points) {
    const Mat a = induced_bivector_at(pi, t, m);
    out.points.push_back(m);
    out.matrices.push_back(a);
    out.ranks.push_back(linalg::skew_rank(a, linalg::kRankTolerance, pi.matrix(m).norm()));
  }
  const Mat restricted = f.jacobian(t.base().span()) * t.tangent_basis(t.base().span());
  out.generators = linalg::pivot_rows(restricted, -1, 1e-8, f.jacobian(t.base().span()).norm());
  std::sort(out.generators.begin(), out.generators.end());
  return out;
}

double bracket_on_transversal(const Bivector& pi, const Transversal& t, const FunctionFamily& f, const Expr& a,
                              const Expr& b, const Point& m) {
  if (!t.contains(m.span())) throw PreconditionError("on-transversal", "point is not on " + t.name());
  const Mat pm = pi.matrix(m);
  const Vec ga = gradient(a, m.span()), gb = gradient(b, m.span());
  const double direct = ga.dot(pm * gb);
  if (t.codim() == 0) return direct;
  const Mat dfm = f.jacobian(m.span());
  const Mat v = t.tangent_basis(m.span());
  const Mat c = linalg::kernel((dfm * v).transpose(), linalg::kRankTolerance, dfm.norm());  // s x K
  const Mat phi = dfm.transpose() * c;                   // gradients of the corrections, n x K
  const Mat dh = t.jacobian(m.span());
  const Vec rhs = dh * (pm.transpose() * ga);
  const Mat lhs = dh * (pm.transpose() * phi);
  Vec lambda = Vec::Zero(phi.cols());
  if (phi.cols() > 0) lambda = lhs.completeOrthogonalDecomposition().solve(rhs);
  const double miss = (lhs * lambda - rhs).norm();
  if (miss > 1e-9 * (1.0 + rhs.norm()))
    throw NumericalError("bracket_on_transversal: lambda-system has no solution (residual " + std::to_string(miss) +
                         ")");
  return direct - (phi * lambda).dot(pm * gb);
}

Mat gauge_transform(const Mat& pi, const Mat& b) {
  const Index n = pi.rows();
  const Mat k = Mat::Identity(n, n) + b * pi;
  const Vec sv = Eigen::JacobiSVD<Mat>(k).singularValues();
  if (sv[n - 1] <= 1e-12 * sv[0]) throw NumericalError("gauge: I + B Pi is singular");
  const Mat r = pi * k.inverse();
  return r;
}

Mat gauge_transform_at(const Bivector& pi, const TwoForm& b, const Point& m) {
  if (!same_chart(pi.chart(), b.chart())) throw ChartMismatch();
  return gauge_transform(pi.matrix(m), b.matrix(m));
}

std::string to_string(Tangency t) {
  switch (t) {
    case Tangency::tangent: return "tangent";
    case Tangency::not_tangent: return "not-tangent";
    default: return "none";
  }
}

std::string to_string(SplitStatus s) {
  switch (s) {
    case SplitStatus::split_witness: return "SPLIT-WITNESS";
    case SplitStatus::unsplit_witness: return "UNSPLIT-WITNESS";
    default: return "INCONCLUSIVE";
  }
}

TransversalInvariant transversal_invariant(const Bivector& pi, const FunctionFamily& f, const Transversal& t,
                                           const ComparisonOptions& options) {
  TransversalInvariant inv;
  inv.transversal = t.name();
  const int d = static_cast<int>(t.dim());
  const Vec u0 = t.coordinates_of(t.base().span());
  const Vec x0 = as_vec(t.base());
  auto matrix_at = [&](const Vec& u) {
    const Vec x = t.lift(u, &x0);
    return induced_bivector_at(pi, t, Point(t.chart(), std::vector<double>(x.data(), x.data() + x.size())));
  };

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> box(-options.half_width, options.half_width);
  std::vector<Vec> starts;
  for (int i = 0; i < options.starts; ++i) {
    Vec u = u0;
    for (int c = 0; c < d; ++c) u[c] += box(rng);
    starts.push_back(u);
  }

  // generic rank and the principal Pfaffian that detects its drop
  double scale = 0.0;
  Vec generic = u0;
  for (const auto& u : starts) {
    const Mat a = matrix_at(u);
    const int r = linalg::skew_rank(a);
    if (r > inv.generic_rank || (r == inv.generic_rank && a.norm() > scale)) {
      inv.generic_rank = r;
      generic = u;
      scale = a.norm();
    }
  }
  if (inv.generic_rank == 0) return inv;
  std::vector<std::vector<int>> candidates;
  std::vector<int> cur;
  subsets(d, inv.generic_rank, 0, cur, candidates);
  const Mat ag = matrix_at(generic);
  std::vector<int> best;
  double best_val = -1.0;
  for (const auto& idx : candidates) {
    const double v = std::abs(linalg::pfaffian(principal(ag, idx)));
    if (v > best_val) best_val = v, best = idx;
  }
  auto pf = [&](const Vec& u) { return linalg::pfaffian(principal(matrix_at(u), best)); };
  const double h = 1e-6;
  auto grad = [&](const Vec& u) {
    Vec g(d);
    for (int c = 0; c < d; ++c) {
      Vec up = u, um = u;
      up[c] += h;
      um[c] -= h;
      g[c] = (pf(up) - pf(um)) / (2 * h);
    }
    return g;
  };

  bool all_tangent = true;
  for (const auto& start : starts) {
    Vec u = start;
    bool ok = false;
    try {
      for (int iter = 0; iter < 50; ++iter) {
        const double val = pf(u);
        if (std::abs(val) <= 1e-13 * std::max(1.0, best_val)) {
          ok = true;
          break;
        }
        const Vec g = grad(u);
        if (g.squaredNorm() == 0.0) break;
        u -= (val / g.squaredNorm()) * g;
        if ((u - u0).lpNorm<Eigen::Infinity>() > 2 * options.half_width) break;
      }
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) continue;
    const Mat a = matrix_at(u);
    const int r = numeric_rank_abs(a, 1e-8 * std::max(1.0, scale));
    if (r >= inv.generic_rank) continue;
    const Vec normal = grad(u);
    if (normal.norm() <= 1e-10 * std::max(1.0, scale)) continue;
    const Vec x = t.lift(u, &x0);
    const std::span<const double> xs(x.data(), x.size());
    const Mat dfx = f.jacobian(xs);
    const Mat k = linalg::kernel(dfx * t.tangent_basis(xs), linalg::kRankTolerance, dfx.norm());
    SingularSample sample;
    sample.coordinates.assign(u.data(), u.data() + d);
    sample.rank = linalg::skew_rank(a);
    sample.misalignment = k.cols() > 0 ? (k.transpose() * normal.normalized()).lpNorm<Eigen::Infinity>() : 0.0;
    if (sample.misalignment > options.tolerance) all_tangent = false;
    inv.singular.push_back(std::move(sample));
  }
  if (!inv.singular.empty()) inv.tangency = all_tangent ? Tangency::tangent : Tangency::not_tangent;
  return inv;
}

ComparisonReport compare_transversals(const Bivector& pi, const FunctionFamily& f, const Transversal& t1,
                                      const Transversal& t2, const ComparisonOptions& options) {
  ComparisonReport rep;
  rep.first = transversal_invariant(pi, f, t1, options);
  rep.second = transversal_invariant(pi, f, t2, options);
  const bool decided = rep.first.tangency != Tangency::none && rep.second.tangency != Tangency::none;
  if (decided && rep.first.tangency != rep.second.tangency) rep.status = SplitStatus::unsplit_witness;
  return rep;
}

}  // namespace poisson
