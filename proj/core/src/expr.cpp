#include "poisson/expr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace poisson {

// ---------------------------------------------------------------- Chart

Chart::Chart(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i)
    for (std::size_t j = i + 1; j < names_.size(); ++j)
      if (names_[i] == names_[j]) throw Error("duplicate coordinate name '" + names_[i] + "'");
}

std::shared_ptr<const Chart> Chart::make(std::vector<std::string> names) {
  return std::make_shared<const Chart>(std::move(names));
}

std::optional<std::size_t> Chart::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

std::size_t Chart::index(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw UnknownVariable(std::string(name));
}

bool same_chart(const ChartPtr& a, const ChartPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

// ---------------------------------------------------------------- orders

namespace {

int degree(const Monomial& m) { return std::accumulate(m.begin(), m.end(), 0); }

Monomial add_monomials(const Monomial& a, const Monomial& b) {
  Monomial r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

bool is_unit_monomial(const Monomial& m) {
  return std::all_of(m.begin(), m.end(), [](int e) { return e == 0; });
}

double monomial_value(const Monomial& m, std::span<const double> x) {
  double v = 1.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] != 0) v *= std::pow(x[i], m[i]);
  return v;
}

Rational monomial_value(const Monomial& m, std::span<const Rational> x) {
  Rational v = 1;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (int k = 0; k < m[i]; ++k) v *= x[i];
  return v;
}

}  // namespace

bool MonomialOrder::operator()(const Monomial& a, const Monomial& b) const {
  const int da = degree(a), db = degree(b);
  if (da != db) return da > db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

bool operator<(const Polynomial& a, const Polynomial& b) {
  MonomialOrder mo;
  auto ia = a.terms_.begin(), ib = b.terms_.begin();
  for (; ia != a.terms_.end() && ib != b.terms_.end(); ++ia, ++ib) {
    if (mo(ia->first, ib->first)) return true;
    if (mo(ib->first, ia->first)) return false;
    if (ia->second != ib->second) return ia->second < ib->second;
  }
  return ia == a.terms_.end() && ib != b.terms_.end();
}

bool TermOrder::operator()(const TermKey& a, const TermKey& b) const {
  MonomialOrder mo;
  if (mo(a.monomial, b.monomial)) return true;
  if (mo(b.monomial, a.monomial)) return false;
  return a.exponent < b.exponent;
}

// ---------------------------------------------------------------- Polynomial

Polynomial Polynomial::constant(std::size_t nvars, const Rational& c) {
  Polynomial p(nvars);
  p.add_term(Monomial(nvars, 0), c);
  return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t i) {
  Polynomial p(nvars);
  Monomial m(nvars, 0);
  m.at(i) = 1;
  p.add_term(m, 1);
  return p;
}

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && is_unit_monomial(terms_.begin()->first));
}

Rational Polynomial::constant_term() const {
  auto it = terms_.find(Monomial(nvars_, 0));
  return it == terms_.end() ? Rational(0) : it->second;
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  if (r.nvars_ == 0) r.nvars_ = o.nvars_;
  for (const auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator-() const { return scaled(-1); }

Polynomial Polynomial::scaled(const Rational& c) const {
  Polynomial r(nvars_);
  if (c == 0) return r;
  for (const auto& [m, v] : terms_) r.terms_.emplace(m, v * c);
  return r;
}

Polynomial Polynomial::derivative(std::size_t var) const {
  Polynomial r(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m[var] == 0) continue;
    Monomial d = m;
    d[var] -= 1;
    r.add_term(d, c * m[var]);
  }
  return r;
}

double Polynomial::evaluate(std::span<const double> x) const {
  double v = 0.0;
  for (const auto& [m, c] : terms_) v += c.get_d() * monomial_value(m, x);
  return v;
}

Rational Polynomial::evaluate(std::span<const Rational> x) const {
  Rational v = 0;
  for (const auto& [m, c] : terms_) v += c * monomial_value(m, x);
  return v;
}

// ---------------------------------------------------------------- Expr

Expr Expr::constant(ChartPtr chart, const Rational& c) {
  Expr e(std::move(chart));
  e.add_term(Monomial(e.nvars(), 0), Polynomial(e.nvars()), c);
  return e;
}

Expr Expr::variable(ChartPtr chart, std::size_t i) {
  Expr e(std::move(chart));
  Monomial m(e.nvars(), 0);
  m.at(i) = 1;
  e.add_term(m, Polynomial(e.nvars()), 1);
  return e;
}

Expr Expr::variable(ChartPtr chart, std::string_view name) {
  const std::size_t i = chart->index(name);
  return variable(std::move(chart), i);
}

Expr Expr::exponential(ChartPtr chart, const Polynomial& exponent) {
  Expr e(std::move(chart));
  Polynomial l = exponent;
  if (l.nvars() == 0) l = Polynomial(e.nvars()) + exponent;
  e.add_term(Monomial(e.nvars(), 0), l, 1);
  return e;
}

void Expr::add_term(Monomial monomial, Polynomial exponent, const Rational& c) {
  if (c == 0) return;
  TermKey key{std::move(monomial), std::move(exponent)};
  auto [it, inserted] = terms_.try_emplace(std::move(key), c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

void Expr::require_same_chart(const Expr& o) const {
  if (!same_chart(chart_, o.chart_)) throw ChartMismatch();
}

bool Expr::is_polynomial() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.exponent.is_zero(); });
}

bool Expr::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && is_unit_monomial(terms_.begin()->first.monomial) &&
                            terms_.begin()->first.exponent.is_zero());
}

Rational Expr::constant_value() const {
  if (!is_constant()) throw ClassError("expression '" + str() + "' is not constant");
  return terms_.empty() ? Rational(0) : terms_.begin()->second;
}

Polynomial Expr::as_polynomial() const {
  if (!is_polynomial()) throw ClassError("expression '" + str() + "' is not a polynomial");
  Polynomial p(nvars());
  for (const auto& [k, c] : terms_) p.add_term(k.monomial, c);
  return p;
}

Expr Expr::operator+(const Expr& o) const {
  require_same_chart(o);
  Expr r = *this;
  for (const auto& [k, c] : o.terms_) r.add_term(k.monomial, k.exponent, c);
  return r;
}

Expr Expr::operator-(const Expr& o) const { return *this + (-o); }

Expr Expr::operator-() const { return scaled(-1); }

Expr Expr::scaled(const Rational& c) const {
  Expr r(chart_);
  if (c == 0) return r;
  for (const auto& [k, v] : terms_) r.terms_.emplace(k, v * c);
  return r;
}

Expr Expr::operator*(const Expr& o) const {
  require_same_chart(o);
  Expr r(chart_);
  for (const auto& [ka, ca] : terms_)
    for (const auto& [kb, cb] : o.terms_)
      r.add_term(add_monomials(ka.monomial, kb.monomial), ka.exponent + kb.exponent, ca * cb);
  return r;
}

Expr operator*(const Rational& c, const Expr& e) { return e.scaled(c); }

Expr Expr::pow(unsigned k) const {
  Expr result = constant(chart_, 1);
  Expr base = *this;
  while (k > 0) {
    if (k & 1u) result = result * base;
    k >>= 1u;
    if (k > 0) base = base * base;
  }
  return result;
}

Expr Expr::derivative(std::size_t var) const {
  if (var >= nvars()) throw UnknownVariable("#" + std::to_string(var));
  Expr r(chart_);
  for (const auto& [k, c] : terms_) {
    if (k.monomial[var] > 0) {
      Monomial d = k.monomial;
      d[var] -= 1;
      r.add_term(d, k.exponent, c * k.monomial[var]);
    }
    const Polynomial dl = k.exponent.derivative(var);
    for (const auto& [m, lc] : dl.terms()) r.add_term(add_monomials(k.monomial, m), k.exponent, c * lc);
  }
  return r;
}

Expr Expr::derivative(std::string_view var) const { return derivative(chart_->index(var)); }

double Expr::evaluate(std::span<const double> x) const {
  if (x.size() != nvars()) throw Error("point dimension does not match chart");
  double v = 0.0;
  for (const auto& [k, c] : terms_) {
    double t = c.get_d() * monomial_value(k.monomial, x);
    if (!k.exponent.is_zero()) t *= std::exp(k.exponent.evaluate(x));
    v += t;
  }
  return v;
}

std::optional<Rational> Expr::evaluate_exact(std::span<const Rational> x) const {
  if (x.size() != nvars()) throw Error("point dimension does not match chart");
  Rational v = 0;
  for (const auto& [k, c] : terms_) {
    if (!k.exponent.is_zero() && k.exponent.evaluate(x) != 0) return std::nullopt;
    v += c * monomial_value(k.monomial, x);
  }
  return v;
}

Expr Expr::compose(std::span<const Expr> images) const {
  if (images.size() != nvars()) throw Error("compose: need one image per coordinate");
  if (images.empty()) return *this;
  const ChartPtr& target = images.front().chart();
  for (const auto& im : images)
    if (!same_chart(im.chart(), target)) throw ChartMismatch();

  auto monomial_image = [&](const Monomial& m) {
    Expr r = constant(target, 1);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] > 0) r = r * images[i].pow(static_cast<unsigned>(m[i]));
    return r;
  };

  Expr result(target);
  for (const auto& [k, c] : terms_) {
    Expr t = monomial_image(k.monomial).scaled(c);
    if (!k.exponent.is_zero()) {
      Expr l(target);
      for (const auto& [m, lc] : k.exponent.terms()) l = l + monomial_image(m).scaled(lc);
      if (!l.is_polynomial())
        throw ClassError("pullback of exp(" + to_string(k.exponent, *chart_) + ") leaves the expression class");
      t = t * exponential(target, l.as_polynomial());
    }
    result = result + t;
  }
  return result;
}

Expr Expr::rechart(const ChartPtr& target) const {
  if (same_chart(chart_, target)) {
    Expr r = *this;
    r.chart_ = target;
    return r;
  }
  const std::size_t n = nvars();
  std::vector<std::optional<std::size_t>> where(n);
  for (std::size_t i = 0; i < n; ++i) where[i] = target->find(chart_->name(i));

  auto map_monomial = [&](const Monomial& m) {
    Monomial out(target->size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (m[i] == 0) continue;
      if (!where[i]) throw UnknownVariable(chart_->name(i));
      out[*where[i]] = m[i];
    }
    return out;
  };

  Expr r(target);
  for (const auto& [k, c] : terms_) {
    Polynomial l(target->size());
    for (const auto& [m, lc] : k.exponent.terms()) l.add_term(map_monomial(m), lc);
    r.add_term(map_monomial(k.monomial), l, c);
  }
  return r;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.terms_.empty() && b.terms_.empty()) return true;
  return same_chart(a.chart_, b.chart_) && a.terms_ == b.terms_;
}

// ---------------------------------------------------------------- printing

std::string to_string(const Rational& q) { return q.get_str(); }

Rational rationalize(double x, double tol) {
  if (!std::isfinite(x)) throw NumericalError("rationalize: non-finite value");
  // convergents h/k of the continued fraction of x
  mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rest = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(rest);
    const mpz_class ai(a);
    mpz_class h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    h0 = h1, h1 = h2, k0 = k1, k1 = k2;
    Rational q(h1, k1);
    q.canonicalize();
    if (std::abs(q.get_d() - x) <= tol * std::max(1.0, std::abs(x))) return q;
    const double frac = rest - a;
    if (frac == 0.0) return q;
    rest = 1.0 / frac;
  }
  return Rational(x);
}

namespace {

std::string monomial_text(const Monomial& m, const Chart& chart) {
  std::string out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += chart.name(i);
    if (m[i] > 1) out += "^" + std::to_string(m[i]);
  }
  return out;
}

// Appends "c*body" to `out` with sign handled by the caller's separator.
void append_term(std::string& out, const Rational& c, const std::string& body, bool first) {
  const bool negative = c < 0;
  const Rational a = abs(c);
  if (first)
    out += negative ? "-" : "";
  else
    out += negative ? " - " : " + ";
  if (body.empty())
    out += to_string(a);
  else if (a == 1)
    out += body;
  else
    out += to_string(a) + "*" + body;
}

}  // namespace

std::string to_string(const Polynomial& p, const Chart& chart) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    append_term(out, c, monomial_text(m, chart), first);
    first = false;
  }
  return out;
}

std::string Expr::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [k, c] : terms_) {
    std::string body = monomial_text(k.monomial, *chart_);
    if (!k.exponent.is_zero()) {
      if (!body.empty()) body += "*";
      body += "exp(" + to_string(k.exponent, *chart_) + ")";
    }
    append_term(out, c, body, first);
    first = false;
  }
  return out;
}

// ---------------------------------------------------------------- Point

Point::Point(ChartPtr c, std::vector<double> v) : chart(std::move(c)), values(std::move(v)) {
  if (chart && chart->size() != values.size()) throw Error("point dimension does not match chart");
}

double evaluate(const Expr& f, const Point& m) {
  if (m.chart && !same_chart(f.chart(), m.chart)) throw ChartMismatch();
  return f.evaluate(m.span());
}

// ---------------------------------------------------------------- CompiledExpr

CompiledExpr::CompiledExpr(const Expr& f) {
  auto factors = [](const Monomial& m) {
    std::vector<Factor> out;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] != 0) out.push_back({static_cast<int>(i), m[i]});
    return out;
  };
  for (const auto& [k, c] : f.terms()) {
    Term t{c.get_d(), factors(k.monomial), {}};
    for (const auto& [m, lc] : k.exponent.terms()) t.exponent.push_back({lc.get_d(), factors(m)});
    terms_.push_back(std::move(t));
  }
}

namespace {
template <class F>
double product(const std::vector<F>& fs, std::span<const double> x) {
  double v = 1.0;
  for (const auto& f : fs) {
    const double b = x[f.var];
    switch (f.power) {
      case 1: v *= b; break;
      case 2: v *= b * b; break;
      default: v *= std::pow(b, f.power);
    }
  }
  return v;
}
}  // namespace

double CompiledExpr::operator()(std::span<const double> x) const {
  double v = 0.0;
  for (const auto& t : terms_) {
    double s = t.coef * product(t.factors, x);
    if (!t.exponent.empty()) {
      double l = 0.0;
      for (const auto& p : t.exponent) l += p.coef * product(p.factors, x);
      s *= std::exp(l);
    }
    v += s;
  }
  return v;
}

}  // namespace poisson
