#include "poisson/leaves.hpp"

#include <algorithm>
#include <cmath>

namespace poisson {

Transversal::Transversal(std::string name, std::vector<Expr> defining, Point base)
    : name_(std::move(name)), defining_(std::move(defining)), base_(std::move(base)) {
  const std::size_t n = chart()->size();
  for (auto& h : defining_) {
    if (h.is_zero()) h = Expr::zero(chart());
    if (!same_chart(h.chart(), chart())) throw ChartMismatch();
    std::vector<Expr> row;
    for (std::size_t k = 0; k < n; ++k) row.push_back(h.derivative(k));
    gradient_.push_back(std::move(row));
  }
  if (codim() > n) throw PreconditionError("transversal", "more defining functions than coordinates");
  if (!contains(base_.span(), 1e-8)) throw PreconditionError("on-transversal", "base point is not on " + name_);
  const Mat dh = jacobian(base_.span());
  pivots_ = linalg::pivot_rows(dh.transpose(), static_cast<int>(codim()));
  if (pivots_.size() != codim())
    throw PreconditionError("transversal", "defining functions of " + name_ + " are dependent at the base point");
  std::sort(pivots_.begin(), pivots_.end());
  for (int k = 0; k < static_cast<int>(n); ++k)
    if (!std::binary_search(pivots_.begin(), pivots_.end(), k)) free_.push_back(k);
}

Vec Transversal::residual(std::span<const double> x) const {
  Vec r(codim());
  for (std::size_t i = 0; i < codim(); ++i) r[i] = defining_[i].evaluate(x);
  return r;
}

Mat Transversal::jacobian(std::span<const double> x) const {
  Mat j(codim(), chart()->size());
  for (std::size_t i = 0; i < codim(); ++i)
    for (std::size_t k = 0; k < chart()->size(); ++k) j(i, k) = gradient_[i][k].evaluate(x);
  return j;
}

bool Transversal::contains(std::span<const double> x, double tol) const {
  return codim() == 0 || residual(x).lpNorm<Eigen::Infinity>() <= tol;
}

std::vector<std::string> Transversal::coordinate_names() const {
  std::vector<std::string> out;
  for (int k : free_) out.push_back(chart()->name(k));
  return out;
}

Mat Transversal::tangent_basis(std::span<const double> x) const {
  const std::size_t n = chart()->size();
  Mat v = Mat::Zero(n, free_.size());
  for (std::size_t c = 0; c < free_.size(); ++c) v(free_[c], c) = 1.0;
  if (codim() == 0) return v;
  const Mat dh = jacobian(x);
  Mat dp(codim(), codim()), dn(codim(), free_.size());
  for (std::size_t i = 0; i < codim(); ++i) {
    for (std::size_t k = 0; k < pivots_.size(); ++k) dp(i, k) = dh(i, pivots_[k]);
    for (std::size_t k = 0; k < free_.size(); ++k) dn(i, k) = dh(i, free_[k]);
  }
  const Mat vp = -dp.fullPivLu().solve(dn);
  for (std::size_t k = 0; k < pivots_.size(); ++k) v.row(pivots_[k]) = vp.row(k);
  return v;
}

Vec Transversal::lift(const Vec& u, const Vec* guess) const {
  const std::size_t n = chart()->size();
  Vec x = guess ? *guess : Eigen::Map<const Vec>(base_.values.data(), n);
  for (std::size_t c = 0; c < free_.size(); ++c) x[free_[c]] = u[c];
  if (codim() == 0) return x;
  for (int iter = 0; iter < 50; ++iter) {
    const std::span<const double> xs(x.data(), n);
    const Vec r = residual(xs);
    if (r.lpNorm<Eigen::Infinity>() <= 1e-14) return x;
    const Mat dh = jacobian(xs);
    Mat dp(codim(), codim());
    for (std::size_t i = 0; i < codim(); ++i)
      for (std::size_t k = 0; k < pivots_.size(); ++k) dp(i, k) = dh(i, pivots_[k]);
    const Vec step = dp.fullPivLu().solve(r);
    for (std::size_t k = 0; k < pivots_.size(); ++k) x[pivots_[k]] -= step[k];
    if (!x.allFinite()) break;
  }
  if (!contains(std::span<const double>(x.data(), n), 1e-10))
    throw NumericalError("transversal " + name_ + ": lift did not converge");
  return x;
}

Vec Transversal::coordinates_of(std::span<const double> x) const {
  Vec u(free_.size());
  for (std::size_t c = 0; c < free_.size(); ++c) u[c] = x[free_[c]];
  return u;
}

Vec Transversal::project(const Vec& x0) const {
  Vec x = x0;
  const std::size_t n = chart()->size();
  for (int iter = 0; iter < 50 && codim() > 0; ++iter) {
    const std::span<const double> xs(x.data(), n);
    const Vec r = residual(xs);
    if (r.lpNorm<Eigen::Infinity>() <= 1e-14) break;
    const Mat dh = jacobian(xs);
    x -= dh.transpose() * (dh * dh.transpose()).ldlt().solve(r);
  }
  if (!contains(std::span<const double>(x.data(), n), 1e-10))
    throw NumericalError("transversal " + name_ + ": projection did not converge");
  return x;
}

// ---------------------------------------------------------------- leaves

Mat leaf_tangent_at(const Bivector& pi, const Point& s) { return linalg::column_space(pi.matrix(s)); }

RegularityReport f_regular_at(const Bivector& pi, const FunctionFamily& f, const Point& s) {
  if (!same_chart(pi.chart(), f.chart())) throw ChartMismatch();
  const Mat tf = foliation_tangent_at(f, s);
  const Mat m = pi.matrix(s);
  const Mat ts = linalg::column_space(m);
  RegularityReport rep;
  rep.r_prime = linalg::skew_rank(m) / 2;
  rep.intersection_dim = linalg::intersection_dim(tf, ts);
  const Mat dfm = f.jacobian(s.span());
  const Mat casimir_dirs = linalg::kernel(m);
  Mat stacked(dfm.rows() + casimir_dirs.cols(), dfm.cols());
  stacked << dfm, casimir_dirs.transpose();
  rep.intersection_dim_stacked = static_cast<int>(linalg::kernel(stacked).cols());
  rep.restricted_rank = ts.cols() > 0 ? linalg::rank(dfm * ts, linalg::kRankTolerance, dfm.norm()) : 0;
  rep.f_regular = rep.intersection_dim == rep.r_prime;
  return rep;
}

CompatibilityReport compatible_transversal_check(const Bivector& pi, const FunctionFamily& f,
                                                 const Transversal& t, const std::vector<Point>& samples) {
  if (!same_chart(pi.chart(), f.chart()) || !same_chart(pi.chart(), t.chart())) throw ChartMismatch();
  CompatibilityReport rep;
  const int n = static_cast<int>(pi.dim());
  rep.r = n - static_cast<int>(f.size());
  const Mat m = pi.matrix(t.base());
  rep.r_prime = linalg::skew_rank(m) / 2;
  const Mat tt = linalg::kernel(t.jacobian(t.base().span()));
  const Mat ts = linalg::column_space(m);
  if (static_cast<int>(t.codim()) != 2 * rep.r_prime || linalg::intersection_dim(tt, ts) != 0)
    throw PreconditionError("transversal", t.name() + " does not cross the leaf transversally at its base point");
  rep.compatible = true;
  for (const auto& x : samples) {
    if (!t.contains(x.span())) throw PreconditionError("on-transversal", "sample point is not on " + t.name());
    const Mat v = t.tangent_basis(x.span());
    const Mat dfx = f.jacobian(x.span());
    const int k = linalg::rank(dfx * v, linalg::kRankTolerance, dfx.norm());
    rep.restricted_ranks.push_back(k);
    rep.leaf_dims.push_back(static_cast<int>(t.dim()) - k);
    if (rep.leaf_dims.back() != rep.r - rep.r_prime) rep.compatible = false;
  }
  return rep;
}

CompatibleTransversal build_compatible_transversal(const Bivector& pi, const FunctionFamily& f, const Point& s,
                                                   const std::vector<double>& a, const std::vector<double>& b,
                                                   const std::string& name) {
  const auto reg = f_regular_at(pi, f, s);
  if (!reg.f_regular)
    throw PreconditionError("f-regular", "dim(T_sF ∩ T_sS) = " + std::to_string(reg.intersection_dim) +
                                             " but r' = " + std::to_string(reg.r_prime));
  const auto& chart = pi.chart();
  const std::size_t n = chart->size();
  const int rp = reg.r_prime;
  const Mat m = pi.matrix(s);
  const Mat dfm = f.jacobian(s.span());
  CompatibleTransversal out;
  out.pivots = linalg::pivot_rows(dfm * linalg::column_space(m), rp, 1e-8, dfm.norm());
  if (static_cast<int>(out.pivots.size()) != rp)
    throw PreconditionError("f-regular", "no r' members of F restrict independently to the leaf");
  if (!a.empty() && a.size() != static_cast<std::size_t>(rp)) throw Error("offset A must have r' entries");
  if (!b.empty() && b.size() != static_cast<std::size_t>(rp)) throw Error("offset B must have r' entries");

  // X_{f_i}(s) = M^T df_i; g_j(x) = c_j . (x - s) with X_{f_i}(s) . c_j = delta_ij.
  Mat xf(rp, n);
  for (int i = 0; i < rp; ++i) xf.row(i) = (m.transpose() * dfm.row(out.pivots[i]).transpose()).transpose();
  const Mat c = xf.completeOrthogonalDecomposition().pseudoInverse();  // n x r'

  std::vector<Expr> defining;
  for (int i = 0; i < rp; ++i) {
    const Expr& fi = f[out.pivots[i]];
    const double offset = fi.evaluate(s.span()) + (a.empty() ? 0.0 : a[i]);
    defining.push_back(fi - Expr::constant(chart, rationalize(offset)));
  }
  for (int j = 0; j < rp; ++j) {
    Expr g = Expr::zero(chart);
    Rational shift = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const Rational ck = rationalize(c(k, j));
      if (ck == 0) continue;
      g = g + Expr::variable(chart, k).scaled(ck);
      shift += ck * rationalize(s.values[k]);
    }
    g = g - Expr::constant(chart, shift);
    out.conjugates.push_back(g);
    defining.push_back(g - Expr::constant(chart, rationalize(b.empty() ? 0.0 : b[j])));
  }

  Vec x0 = Eigen::Map<const Vec>(s.values.data(), n);
  if (!defining.empty()) {
    // Newton projection of s onto the level set.
    for (int iter = 0; iter < 50; ++iter) {
      Vec r(defining.size());
      Mat dh(defining.size(), n);
      for (std::size_t i = 0; i < defining.size(); ++i) {
        r[i] = defining[i].evaluate(std::span<const double>(x0.data(), n));
        for (std::size_t k = 0; k < n; ++k)
          dh(i, k) = defining[i].derivative(k).evaluate(std::span<const double>(x0.data(), n));
      }
      if (r.lpNorm<Eigen::Infinity>() <= 1e-14) break;
      x0 -= dh.transpose() * (dh * dh.transpose()).ldlt().solve(r);
      if (!x0.allFinite()) throw NumericalError("build_compatible_transversal: projection diverged");
    }
  }
  out.transversal = Transversal(name, defining, Point(chart, std::vector<double>(x0.data(), x0.data() + n)));
  return out;
}

}  // namespace poisson
