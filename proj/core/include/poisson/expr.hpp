#pragma once

// Exact symbolic kernel for the expression class
//
//     f = sum_k c_k * x^{a_k} * exp(L_k(x))
//
// with rational coefficients c_k, monomials x^{a_k} and polynomial exponents
// L_k with rational coefficients. The class is a ring closed under partial
// differentiation, and zero-testing is exact: exp(L_1), ..., exp(L_m) with
// pairwise distinct L_i are linearly independent over the polynomials (and
// exp(c) is irrational for rational c != 0), so an expression is zero iff
// its canonical term list is empty.

#include <gmpxx.h>

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poisson/errors.hpp"

namespace poisson {

using Rational = mpq_class;

/// Ordered list of coordinate names. Shared by every expression over it.
class Chart {
 public:
  explicit Chart(std::vector<std::string> names);

  static std::shared_ptr<const Chart> make(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }

  /// Index of `name`, or nullopt when it is not a coordinate of this chart.
  std::optional<std::size_t> find(std::string_view name) const;
  /// Index of `name`; throws UnknownVariable.
  std::size_t index(std::string_view name) const;

  friend bool operator==(const Chart& a, const Chart& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
};

using ChartPtr = std::shared_ptr<const Chart>;

bool same_chart(const ChartPtr& a, const ChartPtr& b);

/// Exponent vector over the chart coordinates.
using Monomial = std::vector<int>;

/// Graded-lex order: higher total degree first, then lexicographically larger.
struct MonomialOrder {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

/// Polynomial with rational coefficients. Used for the exponents L_k.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, Rational, MonomialOrder>;

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, const Rational& c);
  static Polynomial variable(std::size_t nvars, std::size_t i);

  std::size_t nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_term() const;

  void add_term(const Monomial& m, const Rational& c);

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator-() const;
  Polynomial scaled(const Rational& c) const;

  Polynomial derivative(std::size_t var) const;

  double evaluate(std::span<const double> x) const;
  Rational evaluate(std::span<const Rational> x) const;

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }
  friend bool operator<(const Polynomial& a, const Polynomial& b);

 private:
  std::size_t nvars_ = 0;
  TermMap terms_;
};

/// A term's structural part: monomial times exp(exponent).
struct TermKey {
  Monomial monomial;
  Polynomial exponent;

  friend bool operator==(const TermKey& a, const TermKey& b) {
    return a.monomial == b.monomial && a.exponent == b.exponent;
  }
};

struct TermOrder {
  bool operator()(const TermKey& a, const TermKey& b) const;
};

/// Immutable expression over a chart. All arithmetic stays in canonical form.
class Expr {
 public:
  using TermMap = std::map<TermKey, Rational, TermOrder>;

  Expr() = default;
  explicit Expr(ChartPtr chart) : chart_(std::move(chart)) {}

  static Expr zero(ChartPtr chart) { return Expr(std::move(chart)); }
  static Expr constant(ChartPtr chart, const Rational& c);
  static Expr variable(ChartPtr chart, std::size_t i);
  static Expr variable(ChartPtr chart, std::string_view name);
  /// exp(L) for a polynomial exponent.
  static Expr exponential(ChartPtr chart, const Polynomial& exponent);

  const ChartPtr& chart() const { return chart_; }
  std::size_t nvars() const { return chart_ ? chart_->size() : 0; }
  const TermMap& terms() const { return terms_; }

  bool is_zero() const { return terms_.empty(); }
  /// True when no term carries a nonzero exponent.
  bool is_polynomial() const;
  bool is_constant() const;
  /// Value of a constant expression; throws when not constant.
  Rational constant_value() const;
  /// Exponent-free expression as a polynomial; throws ClassError otherwise.
  Polynomial as_polynomial() const;

  Expr operator+(const Expr& o) const;
  Expr operator-(const Expr& o) const;
  Expr operator*(const Expr& o) const;
  Expr operator-() const;
  Expr scaled(const Rational& c) const;
  Expr pow(unsigned k) const;

  Expr derivative(std::size_t var) const;
  Expr derivative(std::string_view var) const;

  /// Floating-point value at a point of the chart.
  double evaluate(std::span<const double> x) const;
  /// Exact value when every exponent vanishes at `x`; nullopt otherwise.
  std::optional<Rational> evaluate_exact(std::span<const Rational> x) const;

  /// Substitute `images[i]` for coordinate i. Images live on a common chart.
  /// Throws ClassError when exp(L o images) leaves the expression class.
  Expr compose(std::span<const Expr> images) const;

  /// Re-express over another chart that contains all variables this one uses
  /// (by name). Throws UnknownVariable if a used variable is missing.
  Expr rechart(const ChartPtr& target) const;

  /// Canonical, parseable text.
  std::string str() const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

  /// Add c * monomial * exp(exponent) in place; used by builders.
  void add_term(Monomial monomial, Polynomial exponent, const Rational& c);

 private:
  void require_same_chart(const Expr& o) const;

  ChartPtr chart_;
  TermMap terms_;
};

Expr operator*(const Rational& c, const Expr& e);

/// Parse `text` over `chart`.
///
/// Grammar: rationals (integers, decimals, scientific notation), chart
/// variables, + - * /, ^ with a nonnegative integer exponent, exp(...) of a
/// polynomial, parentheses. Divisors must be nonzero rational constants.
Expr parse(std::string_view text, const ChartPtr& chart);

std::string to_string(const Rational& q);

/// Nearest simple fraction within `tol` of `x` (continued fractions).
Rational rationalize(double x, double tol = 1e-13);
std::string to_string(const Polynomial& p, const Chart& chart);

/// Point of a chart with floating coordinates.
struct Point {
  ChartPtr chart;
  std::vector<double> values;

  Point() = default;
  Point(ChartPtr c, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  std::span<const double> span() const { return values; }
};

double evaluate(const Expr& f, const Point& m);

/// Fast floating-point evaluator for a fixed expression.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& f);

  double operator()(std::span<const double> x) const;
  bool empty() const { return terms_.empty(); }

 private:
  struct Factor {
    int var;
    int power;
  };
  struct PolyTerm {
    double coef;
    std::vector<Factor> factors;
  };
  struct Term {
    double coef;
    std::vector<Factor> factors;
    std::vector<PolyTerm> exponent;
  };
  std::vector<Term> terms_;
};

}  // namespace poisson
