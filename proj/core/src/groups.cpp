#include "poisson/groups.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <optional>

namespace poisson {

namespace {

using RMat = std::vector<std::vector<Rational>>;

std::optional<RMat> invert_exact(RMat a) {
  const std::size_t n = a.size();
  RMat inv(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const Rational d = a[col][col];
    for (std::size_t k = 0; k < n; ++k) {
      a[col][k] /= d;
      inv[col][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Rational f = a[r][col];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[col][k];
        inv[r][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

SymbolicMap linear_map(const ChartPtr& chart, const Mat& a) {
  SymbolicMap m{chart, chart, {}};
  for (Index i = 0; i < a.rows(); ++i) {
    Expr e = Expr::zero(chart);
    for (Index j = 0; j < a.cols(); ++j) {
      const Rational q = rationalize(std::round(a(i, j) * 1e12) / 1e12, 1e-13);
      if (q != 0) e = e + Expr::variable(chart, j).scaled(q);
    }
    m.components.push_back(e);
  }
  return m;
}

Vec to_vec(const Point& p) { return Eigen::Map<const Vec>(p.values.data(), p.values.size()); }

}  // namespace

GroupAction GroupAction::finite(ChartPtr chart, std::vector<std::string> elements,
                                std::vector<std::vector<int>> table, std::vector<SymbolicMap> maps) {
  const int n = static_cast<int>(elements.size());
  if (n == 0) throw Error("group: no elements");
  if (static_cast<int>(table.size()) != n || static_cast<int>(maps.size()) != n)
    throw Error("group: table and maps need one entry per element");
  for (const auto& row : table) {
    if (static_cast<int>(row.size()) != n) throw Error("group: table is not square");
    for (int v : row)
      if (v < 0 || v >= n) throw Error("group: table entry out of range");
  }
  GroupAction g;
  g.chart_ = std::move(chart);
  g.identity_ = -1;
  for (int e = 0; e < n && g.identity_ < 0; ++e) {
    bool ok = true;
    for (int h = 0; h < n && ok; ++h) ok = table[e][h] == h && table[h][e] == h;
    if (ok) g.identity_ = e;
  }
  if (g.identity_ < 0) throw Error("group: table has no identity");
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (table[table[a][b]][c] != table[a][table[b][c]]) throw Error("group: table is not associative");
  g.inverse_.assign(n, -1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b)
      if (table[a][b] == g.identity_ && table[b][a] == g.identity_) g.inverse_[a] = b;
    if (g.inverse_[a] < 0) throw Error("group: element '" + elements[a] + "' has no inverse");
  }
  for (const auto& m : maps) {
    if (!same_chart(m.source, g.chart_) || !same_chart(m.target, g.chart_) || m.components.size() != g.chart_->size())
      throw ChartMismatch("group: element maps must be self-maps of the model chart");
  }
  g.elements_ = std::move(elements);
  g.table_ = std::move(table);
  g.maps_ = std::move(maps);
  return g;
}

GroupAction GroupAction::cyclic(ChartPtr chart, const Mat& generator_matrix, int order, std::string prefix) {
  if (order < 1) throw Error("group: cyclic order must be positive");
  std::vector<std::string> names;
  std::vector<std::vector<int>> table(order, std::vector<int>(order));
  std::vector<SymbolicMap> maps;
  Mat power = Mat::Identity(generator_matrix.rows(), generator_matrix.cols());
  for (int k = 0; k < order; ++k) {
    names.push_back(k == 0 ? "e" : prefix + std::to_string(k));
    for (int l = 0; l < order; ++l) table[k][l] = (k + l) % order;
    maps.push_back(linear_map(chart, power));
    power = generator_matrix * power;
  }
  return finite(std::move(chart), names, table, maps);
}

GroupAction GroupAction::trivial(ChartPtr chart) {
  auto id = SymbolicMap::identity(chart);
  return finite(std::move(chart), {"e"}, {{0}}, {id});
}

GroupAction GroupAction::circle(ChartPtr chart, const Mat& k, int nodes) {
  const Mat step = (2.0 * std::numbers::pi / nodes * k).exp();
  GroupAction g = cyclic(std::move(chart), step, nodes, "t");
  g.kind_ = Kind::circle;
  return g;
}

std::size_t GroupAction::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < elements_.size(); ++i)
    if (elements_[i] == name) return i;
  throw Error("group: unknown element '" + std::string(name) + "'");
}

ActionCheck verify_action(const GroupAction& g, const std::vector<Point>& samples, double tol) {
  ActionCheck out;
  for (const auto& m : samples) {
    const Vec x = to_vec(m);
    out.residual = std::max(out.residual, (g.map(g.identity()).apply(m.span()) - x).lpNorm<Eigen::Infinity>());
    for (std::size_t a = 0; a < g.order(); ++a) {
      const Vec ya = g.map(a).apply(m.span());
      for (std::size_t b = 0; b < g.order(); ++b) {
        const Vec yb = g.map(b).apply(m.span());
        const Vec lhs = g.map(a).apply(std::span<const double>(yb.data(), yb.size()));
        const Vec rhs = g.map(g.product(a, b)).apply(m.span());
        out.residual = std::max(out.residual, (lhs - rhs).lpNorm<Eigen::Infinity>());
      }
    }
  }
  out.ok = out.residual <= tol;
  return out;
}

ActionCheck preserves_poisson(const GroupAction& g, const Bivector& pi, const std::vector<Point>& samples,
                              double tol) {
  if (!same_chart(g.chart(), pi.chart())) throw ChartMismatch();
  ActionCheck out;
  for (const auto& m : samples)
    for (const auto& map : g.maps()) {
      const Vec y = map.apply(m.span());
      const Mat image = pi.matrix(std::span<const double>(y.data(), y.size()));
      out.residual = std::max(out.residual, (pushforward(pi, map, m) - image).lpNorm<Eigen::Infinity>());
    }
  out.ok = out.residual <= tol;
  return out;
}

Expr haar_average(const GroupAction& g, const Expr& f) {
  if (f.is_zero()) return Expr::zero(g.chart());
  if (!same_chart(f.chart(), g.chart())) throw ChartMismatch();
  Expr sum = Expr::zero(g.chart());
  for (const auto& map : g.maps()) sum = sum + map.pullback(f);
  return sum.scaled(Rational(1, static_cast<long>(g.order())));
}

bool is_invariant(const GroupAction& g, const Expr& f) {
  for (const auto& map : g.maps())
    if (!(map.pullback(f) - f).is_zero()) return false;
  return true;
}

std::vector<Mat> linear_parts(const GroupAction& g, const Point& m) {
  std::vector<Mat> a;
  for (const auto& map : g.maps()) a.push_back(map.jacobian(m.span()));
  return a;
}

double homomorphism_residual(const GroupAction& g, const std::vector<Mat>& a) {
  double r = 0.0;
  for (std::size_t x = 0; x < g.order(); ++x)
    for (std::size_t y = 0; y < g.order(); ++y)
      r = std::max(r, (a[g.product(x, y)] - a[x] * a[y]).lpNorm<Eigen::Infinity>());
  return r;
}

BochnerChart bochner_linearize(const GroupAction& g, const Point& m, const std::vector<Point>& samples) {
  const auto& chart = g.chart();
  const std::size_t n = chart->size();
  for (const auto& map : g.maps())
    if ((map.apply(m.span()) - to_vec(m)).lpNorm<Eigen::Infinity>() > 1e-10)
      throw PreconditionError("fixed-point", "the supplied point is not fixed by every group element");

  std::vector<Rational> mq;
  for (double v : m.values) mq.push_back(rationalize(v));
  BochnerChart out;
  out.exact = true;
  std::vector<RMat> inverses;
  for (const auto& map : g.maps()) {
    RMat a(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n && out.exact; ++i)
      for (std::size_t j = 0; j < n && out.exact; ++j) {
        auto v = map.components[i].derivative(j).evaluate_exact(mq);
        if (!v) out.exact = false;
        else a[i][j] = *v;
      }
    if (!out.exact) break;
    auto inv = invert_exact(a);
    if (!inv) throw PreconditionError("fixed-point", "an element acts with a singular linear part");
    inverses.push_back(std::move(*inv));
  }
  out.certificate.matrices = linear_parts(g, m);
  if (!out.exact) {
    inverses.clear();
    for (const auto& a : out.certificate.matrices) {
      const Mat ai = a.fullPivLu().inverse();
      RMat r(n, std::vector<Rational>(n));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r[i][j] = rationalize(ai(i, j), 1e-15);
      inverses.push_back(std::move(r));
    }
  }

  out.phi = SymbolicMap{chart, chart, {}};
  const Rational weight(1, static_cast<long>(g.order()));
  for (std::size_t i = 0; i < n; ++i) {
    Expr c = Expr::zero(chart);
    for (std::size_t e = 0; e < g.order(); ++e)
      for (std::size_t j = 0; j < n; ++j) {
        if (inverses[e][i][j] == 0) continue;
        const Expr centered = g.map(e).components[j] - Expr::constant(chart, mq[j]);
        c = c + centered.scaled(inverses[e][i][j]);
      }
    out.phi.components.push_back(c.scaled(weight));
  }
  const Mat dphi = out.phi.jacobian(m.span());
  if (linalg::rank(dphi, 1e-10) < static_cast<int>(n))
    throw NumericalError("bochner: averaged chart is degenerate at the fixed point");

  auto& cert = out.certificate;
  cert.homomorphism_residual = homomorphism_residual(g, cert.matrices);
  for (const auto& x : samples) {
    const Vec px = out.phi.apply(x.span());
    for (std::size_t e = 0; e < g.order(); ++e) {
      const Vec y = g.map(e).apply(x.span());
      const Vec lhs = out.phi.apply(std::span<const double>(y.data(), y.size()));
      cert.conjugation_residual = std::max(cert.conjugation_residual, (lhs - cert.matrices[e] * px).lpNorm<Eigen::Infinity>());
    }
  }
  cert.ok = cert.homomorphism_residual <= 1e-9 && cert.conjugation_residual <= 1e-8;
  return out;
}

}  // namespace poisson
