#include "poisson/geometry.hpp"

namespace poisson {

Bivector::Bivector(ChartPtr chart) : chart_(std::move(chart)) {
  const std::size_t n = chart_->size();
  upper_.assign(n * (n > 0 ? n - 1 : 0) / 2, Expr::zero(chart_));
}

std::size_t Bivector::slot(std::size_t i, std::size_t j) const {
  const std::size_t n = dim();
  // index of (i,j), i<j, in row-major upper triangle
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

Expr Bivector::entry(std::size_t i, std::size_t j) const {
  if (i == j) return Expr::zero(chart_);
  if (i < j) return upper_[slot(i, j)];
  return -upper_[slot(j, i)];
}

void Bivector::set(std::size_t i, std::size_t j, const Expr& value) {
  if (i == j) throw Error("bivector diagonal entries are zero");
  if (!same_chart(value.chart(), chart_) && !value.is_zero()) throw ChartMismatch();
  const Expr v = value.is_zero() ? Expr::zero(chart_) : value;
  if (i < j)
    upper_[slot(i, j)] = v;
  else
    upper_[slot(j, i)] = -v;
  poisson_checked_ = false;
}

void Bivector::set(std::string_view a, std::string_view b, const Expr& value) {
  set(chart_->index(a), chart_->index(b), value);
}

Mat Bivector::matrix(std::span<const double> x) const {
  const std::size_t n = dim();
  Mat m = Mat::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Expr& e = upper_[slot(i, j)];
      if (e.is_zero()) continue;
      const double v = e.evaluate(x);
      m(i, j) = v;
      m(j, i) = -v;
    }
  return m;
}

// ---------------------------------------------------------------- fields

Expr VectorField::apply(const Expr& g) const {
  Expr r = Expr::zero(chart);
  for (std::size_t k = 0; k < components.size(); ++k)
    if (!components[k].is_zero()) r = r + components[k] * g.derivative(k);
  return r;
}

Vec VectorField::evaluate(std::span<const double> x) const {
  Vec v(components.size());
  for (std::size_t k = 0; k < components.size(); ++k) v[k] = components[k].evaluate(x);
  return v;
}

bool VectorField::is_zero() const {
  for (const auto& c : components)
    if (!c.is_zero()) return false;
  return true;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  if (!same_chart(x.chart, y.chart)) throw ChartMismatch();
  VectorField r{x.chart, {}};
  for (std::size_t k = 0; k < x.components.size(); ++k)
    r.components.push_back(x.apply(y.components[k]) - y.apply(x.components[k]));
  return r;
}

// ---------------------------------------------------------------- maps

SymbolicMap SymbolicMap::identity(const ChartPtr& chart) {
  SymbolicMap m{chart, chart, {}};
  for (std::size_t i = 0; i < chart->size(); ++i) m.components.push_back(Expr::variable(chart, i));
  return m;
}

Vec SymbolicMap::apply(std::span<const double> x) const {
  Vec y(components.size());
  for (std::size_t k = 0; k < components.size(); ++k) y[k] = components[k].evaluate(x);
  return y;
}

std::vector<std::vector<Expr>> SymbolicMap::symbolic_jacobian() const {
  std::vector<std::vector<Expr>> j;
  for (const auto& c : components) {
    std::vector<Expr> row;
    for (std::size_t i = 0; i < source->size(); ++i) row.push_back(c.derivative(i));
    j.push_back(std::move(row));
  }
  return j;
}

Mat SymbolicMap::jacobian(std::span<const double> x) const {
  Mat j(components.size(), source->size());
  for (std::size_t k = 0; k < components.size(); ++k)
    for (std::size_t i = 0; i < source->size(); ++i) j(k, i) = components[k].derivative(i).evaluate(x);
  return j;
}

Expr SymbolicMap::pullback(const Expr& f) const {
  if (!same_chart(f.chart(), target)) throw ChartMismatch();
  return f.compose(components);
}

SymbolicMap SymbolicMap::after(const SymbolicMap& inner) const {
  if (!same_chart(inner.target, source)) throw ChartMismatch();
  SymbolicMap m{inner.source, target, {}};
  for (const auto& c : components) m.components.push_back(c.compose(inner.components));
  return m;
}

// ---------------------------------------------------------------- brackets

Expr bracket(const Bivector& pi, const Expr& f, const Expr& g) {
  if (!same_chart(f.chart(), pi.chart()) || !same_chart(g.chart(), pi.chart())) throw ChartMismatch();
  const std::size_t n = pi.dim();
  std::vector<Expr> df, dg;
  for (std::size_t i = 0; i < n; ++i) {
    df.push_back(f.derivative(i));
    dg.push_back(g.derivative(i));
  }
  Expr r = Expr::zero(pi.chart());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Expr p = pi.entry(i, j);
      if (p.is_zero()) continue;
      const Expr w = df[i] * dg[j] - df[j] * dg[i];
      if (!w.is_zero()) r = r + p * w;
    }
  return r;
}

VectorField hamiltonian_vf(const Bivector& pi, const Expr& f) {
  if (!same_chart(f.chart(), pi.chart())) throw ChartMismatch();
  const std::size_t n = pi.dim();
  VectorField x{pi.chart(), {}};
  std::vector<Expr> df;
  for (std::size_t i = 0; i < n; ++i) df.push_back(f.derivative(i));
  // X_f[x_k] = {f, x_k} = sum_a d_a f pi_ak
  for (std::size_t k = 0; k < n; ++k) {
    Expr c = Expr::zero(pi.chart());
    for (std::size_t a = 0; a < n; ++a)
      if (a != k && !df[a].is_zero()) c = c + df[a] * pi.entry(a, k);
    x.components.push_back(c);
  }
  return x;
}

std::vector<JacobiatorTerm> jacobiator(const Bivector& pi) {
  const std::size_t n = pi.dim();
  std::vector<JacobiatorTerm> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        // {x_i,{x_j,x_k}} = sum_a pi_ia d_a pi_jk
        auto nested = [&](std::size_t a1, std::size_t b1, std::size_t c1) {
          const Expr inner = pi.entry(b1, c1);
          Expr r = Expr::zero(pi.chart());
          for (std::size_t a = 0; a < n; ++a) {
            if (a == a1) continue;
            const Expr d = inner.derivative(a);
            if (!d.is_zero()) r = r + pi.entry(a1, a) * d;
          }
          return r;
        };
        out.push_back({i, j, k, nested(i, j, k) + nested(j, k, i) + nested(k, i, j)});
      }
  return out;
}

std::vector<JacobiatorTerm> jacobiator(Bivector& pi) {
  auto out = jacobiator(static_cast<const Bivector&>(pi));
  pi.mark_poisson(all_zero(out));
  return out;
}

bool all_zero(const std::vector<JacobiatorTerm>& terms) {
  for (const auto& t : terms)
    if (!t.value.is_zero()) return false;
  return true;
}

int rank_at(const Bivector& pi, const Point& m) { return linalg::skew_rank(pi.matrix(m)); }

Mat pushforward(const Bivector& pi, const SymbolicMap& phi, const Point& m) {
  if (!same_chart(phi.source, pi.chart())) throw ChartMismatch();
  const Mat j = phi.jacobian(m.span());
  if (j.rows() != j.cols() || linalg::rank(j, 1e-12) < j.rows())
    throw NumericalError("pushforward: singular Jacobian");
  return j * pi.matrix(m) * j.transpose();
}

Bivector direct_product(const Bivector& a, const Bivector& b) {
  std::vector<std::string> names = a.chart()->names();
  for (const auto& nm : b.chart()->names()) {
    if (a.chart()->find(nm)) throw Error("direct_product: coordinate '" + nm + "' appears in both factors");
    names.push_back(nm);
  }
  auto chart = Chart::make(names);
  Bivector p(chart);
  const std::size_t na = a.dim(), nb = b.dim();
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = i + 1; j < na; ++j) p.set(i, j, a.entry(i, j).rechart(chart));
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = i + 1; j < nb; ++j) p.set(na + i, na + j, b.entry(i, j).rechart(chart));
  return p;
}

}  // namespace poisson
