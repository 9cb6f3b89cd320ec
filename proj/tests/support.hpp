#pragma once

// Shared helpers for the test suites: small model builders and random
// expression generators for property checks.

#include <ostream>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "poisson/expr.hpp"
#include "poisson/geometry.hpp"
#include "poisson/systems.hpp"

namespace poisson {
inline void PrintTo(const Expr& e, std::ostream* os) { *os << e.str(); }
}  // namespace poisson

namespace poisson::testing {

inline Bivector make_bivector(const ChartPtr& chart,
                              const std::vector<std::tuple<std::string, std::string, std::string>>& entries) {
  Bivector pi(chart);
  for (const auto& [a, b, e] : entries) pi.set(a, b, parse(e, chart));
  return pi;
}

inline FunctionFamily make_family(const ChartPtr& chart, const std::vector<std::string>& fs) {
  std::vector<Expr> v;
  for (const auto& f : fs) v.push_back(parse(f, chart));
  return FunctionFamily(chart, v);
}

// xy dx^dy + dq^dp on (x, y, q, p)
inline Bivector first_counterexample() {
  return make_bivector(Chart::make({"x", "y", "q", "p"}), {{"x", "y", "x*y"}, {"q", "p", "1"}});
}

// dx^dy + p dp^dq on (x, y, p, q)
inline Bivector second_counterexample() {
  return make_bivector(Chart::make({"x", "y", "p", "q"}), {{"x", "y", "1"}, {"p", "q", "p"}});
}

inline Bivector so3() {
  return make_bivector(Chart::make({"x", "y", "z"}), {{"x", "y", "z"}, {"y", "z", "x"}, {"z", "x", "y"}});
}

// dq^dp + z1 dz1^dz2 on (q, p, z1, z2)
inline Bivector z2_model() {
  return make_bivector(Chart::make({"q", "p", "z1", "z2"}), {{"q", "p", "1"}, {"z1", "z2", "z1"}});
}

// dq^dp + (z1^2 + z2^2) dz1^dz2: invariant under (z1, z2) -> (-z1, -z2)
inline Bivector z2_even_model() {
  return make_bivector(Chart::make({"q", "p", "z1", "z2"}), {{"q", "p", "1"}, {"z1", "z2", "z1^2 + z2^2"}});
}

inline Point origin(const ChartPtr& chart) { return Point(chart, std::vector<double>(chart->size(), 0.0)); }

/// Random rational with small numerator and denominator.
inline Rational random_rational(std::mt19937& rng, int max_num = 4, int max_den = 3) {
  std::uniform_int_distribution<int> num(-max_num, max_num);
  std::uniform_int_distribution<int> den(1, max_den);
  int n = 0;
  while (n == 0) n = num(rng);
  Rational q(n, den(rng));
  q.canonicalize();
  return q;
}

/// Random element of the expression class: a few terms c * x^a * exp(L)
/// with low degrees and (mostly) linear exponents.
inline Expr random_expr(std::mt19937& rng, const ChartPtr& chart, int max_terms = 3, bool with_exp = true) {
  const std::size_t n = chart->size();
  std::uniform_int_distribution<int> nterms(1, max_terms);
  std::uniform_int_distribution<int> power(0, 2);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::size_t> var(0, n - 1);
  Expr e(chart);
  const int k = nterms(rng);
  for (int t = 0; t < k; ++t) {
    Monomial m(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (coin(rng)) m[i] = power(rng);
    Polynomial l(n);
    if (with_exp && coin(rng)) {
      Monomial lin(n, 0);
      lin[var(rng)] = 1;
      l.add_term(lin, random_rational(rng, 2, 2));
      if (coin(rng)) {
        Monomial lin2(n, 0);
        lin2[var(rng)] = 1;
        l.add_term(lin2, random_rational(rng, 1, 2));
      }
    }
    e.add_term(m, l, random_rational(rng));
  }
  return e;
}

inline std::vector<double> random_point(std::mt19937& rng, std::size_t n, double half_width = 1.0) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

}  // namespace poisson::testing
