#include <gtest/gtest.h>

#include "poisson/geometry.hpp"
#include "support.hpp"

namespace poisson {
namespace {

using testing::make_bivector;

// xy ∂x∧∂y + ∂q∧∂p
Bivector first_counterexample() {
  return make_bivector(Chart::make({"x", "y", "q", "p"}), {{"x", "y", "x*y"}, {"q", "p", "1"}});
}

// ∂x∧∂y + p ∂p∧∂q
Bivector second_counterexample() {
  return make_bivector(Chart::make({"x", "y", "p", "q"}), {{"x", "y", "1"}, {"p", "q", "p"}});
}

Bivector so3() {
  return make_bivector(Chart::make({"x", "y", "z"}), {{"x", "y", "z"}, {"y", "z", "x"}, {"z", "x", "y"}});
}

TEST(Bracket, FirstCounterexampleCoordinates) {
  const auto pi = first_counterexample();
  const auto& c = pi.chart();
  EXPECT_EQ(bracket(pi, parse("x", c), parse("y", c)), parse("x*y", c));
}

TEST(Bracket, SelfBracketVanishes) {
  std::mt19937 rng(10);
  const auto pi = first_counterexample();
  for (int i = 0; i < 20; ++i) {
    const Expr f = testing::random_expr(rng, pi.chart());
    EXPECT_TRUE(bracket(pi, f, f).is_zero());
  }
}

TEST(Bracket, ExponentialPairSignConvention) {
  const auto pi = first_counterexample();
  const auto& c = pi.chart();
  // Under {q,p} = 1 the pair (x e^p, y e^q) commutes and (x e^p, y e^-q) does not.
  EXPECT_TRUE(bracket(pi, parse("x*exp(p)", c), parse("y*exp(q)", c)).is_zero());
  EXPECT_EQ(bracket(pi, parse("x*exp(p)", c), parse("y*exp(-q)", c)), parse("2*x*y*exp(p-q)", c));
}

TEST(HamiltonianField, SecondCounterexample) {
  const auto pi = second_counterexample();
  const auto& c = pi.chart();
  const VectorField xx = hamiltonian_vf(pi, parse("x", c));
  EXPECT_EQ(xx.components, (std::vector<Expr>{Expr::zero(c), parse("1", c), Expr::zero(c), Expr::zero(c)}));
  const VectorField xh = hamiltonian_vf(pi, parse("p + x*q", c));
  EXPECT_EQ(xh.components, (std::vector<Expr>{Expr::zero(c), parse("q", c), parse("-x*p", c), parse("p", c)}));
  EXPECT_TRUE(hamiltonian_vf(pi, parse("7/3", c)).is_zero());
}

TEST(HamiltonianField, ActsAsBracket) {
  std::mt19937 rng(11);
  const auto pi = first_counterexample();
  for (int i = 0; i < 20; ++i) {
    const Expr f = testing::random_expr(rng, pi.chart()), g = testing::random_expr(rng, pi.chart());
    EXPECT_EQ(hamiltonian_vf(pi, f).apply(g), bracket(pi, f, g));
  }
}

TEST(Jacobiator, Examples) {
  auto canon = make_bivector(Chart::make({"q", "p", "u"}), {{"q", "p", "1"}, {"p", "u", "3"}});
  EXPECT_TRUE(all_zero(jacobiator(canon)));
  EXPECT_TRUE(canon.is_poisson());

  auto lp = so3();
  EXPECT_TRUE(all_zero(jacobiator(lp)));

  auto bad = make_bivector(Chart::make({"x", "y", "z"}), {{"x", "y", "z"}, {"x", "z", "x"}});
  const auto terms = jacobiator(bad);
  ASSERT_EQ(terms.size(), 1u);
  EXPECT_EQ(terms[0].value, parse("z", bad.chart()));
  EXPECT_FALSE(bad.is_poisson());

  auto first = first_counterexample();
  auto second = second_counterexample();
  EXPECT_TRUE(all_zero(jacobiator(first)));
  EXPECT_TRUE(all_zero(jacobiator(second)));
}

TEST(Rank, Examples) {
  const auto pi = first_counterexample();
  EXPECT_EQ(rank_at(pi, Point(pi.chart(), {0, 0, 0, 0})), 2);
  EXPECT_EQ(rank_at(pi, Point(pi.chart(), {1, 1, 0, 0})), 4);
  EXPECT_EQ(rank_at(Bivector(pi.chart()), Point(pi.chart(), {1, 2, 3, 4})), 0);
  const auto lp = so3();
  EXPECT_EQ(rank_at(lp, Point(lp.chart(), {1, 0, 0})), 2);
  EXPECT_EQ(rank_at(lp, Point(lp.chart(), {0, 0, 0})), 0);
}

TEST(Pushforward, Examples) {
  auto c = Chart::make({"z1", "z2"});
  auto pi = make_bivector(c, {{"z1", "z2", "z1"}});
  const Point m(c, {0.3, -0.7});
  EXPECT_TRUE(pushforward(pi, SymbolicMap::identity(c), m).isApprox(pi.matrix(m)));

  SymbolicMap flip{c, c, {parse("-z1", c), parse("z2", c)}};
  const Vec image = flip.apply(m.span());
  const Mat at_image = pi.matrix(std::vector<double>(image.data(), image.data() + 2));
  EXPECT_NEAR((pushforward(pi, flip, m) - at_image).norm(), 0.0, 1e-15);

  // The full reflection reverses the sign of z1 without touching J M J^T.
  SymbolicMap reflect{c, c, {parse("-z1", c), parse("-z2", c)}};
  const Vec r = reflect.apply(m.span());
  const Mat at_r = pi.matrix(std::vector<double>(r.data(), r.data() + 2));
  EXPECT_TRUE(pushforward(pi, reflect, m).isApprox(pi.matrix(m)));
  EXPECT_TRUE(pushforward(pi, reflect, m).isApprox(-at_r));

  auto cxy = Chart::make({"x", "y"});
  auto canon = make_bivector(cxy, {{"x", "y", "1"}});
  SymbolicMap scale{cxy, cxy, {parse("2*x", cxy), parse("y", cxy)}};
  EXPECT_TRUE(pushforward(canon, scale, Point(cxy, {1, 1})).isApprox(2 * canon.matrix(Point(cxy, {1, 1}))));

  SymbolicMap collapse{cxy, cxy, {parse("x", cxy), parse("x", cxy)}};
  EXPECT_THROW(pushforward(canon, collapse, Point(cxy, {1, 1})), NumericalError);
}

TEST(Pushforward, RankInvariantUnderInvertibleMaps) {
  std::mt19937 rng(12);
  const auto pi = first_counterexample();
  const auto& c = pi.chart();
  // invertible polynomial map: triangular with unit diagonal
  SymbolicMap phi{c, c, {parse("x", c), parse("y + x^2", c), parse("q + x*y", c), parse("p - q^2 + y", c)}};
  for (int i = 0; i < 20; ++i) {
    const Point m(c, testing::random_point(rng, 4));
    EXPECT_EQ(linalg::skew_rank(pushforward(pi, phi, m)), rank_at(pi, m));
  }
  EXPECT_EQ(linalg::skew_rank(pushforward(pi, phi, Point(c, {0, 0, 0.5, 0.2}))), 2);
}

TEST(DirectProduct, BlocksAndRank) {
  auto a = make_bivector(Chart::make({"q", "p"}), {{"q", "p", "1"}});
  auto b = make_bivector(Chart::make({"p'", "q'"}), {{"p'", "q'", "p'"}});
  auto prod = direct_product(a, b);
  EXPECT_EQ(prod.chart()->names(), (std::vector<std::string>{"q", "p", "p'", "q'"}));
  EXPECT_EQ(prod.entry(2, 3), parse("p'", prod.chart()));
  EXPECT_TRUE(prod.entry(0, 2).is_zero());
  EXPECT_TRUE(all_zero(jacobiator(prod)));
  EXPECT_EQ(rank_at(prod, Point(prod.chart(), {0, 0, 1, 0})), 4);
  EXPECT_EQ(rank_at(prod, Point(prod.chart(), {0, 0, 0, 0})), 2);

  auto zero = Bivector(Chart::make({"z"}));
  auto split = direct_product(a, zero);
  EXPECT_TRUE(split.entry(0, 2).is_zero());
  EXPECT_TRUE(split.entry(1, 2).is_zero());
  EXPECT_THROW(direct_product(a, a), Error);
}

TEST(Properties, AntisymmetryLeibnizJacobi) {
  std::mt19937 rng(13);
  for (auto pi : {first_counterexample(), second_counterexample()}) {
    const auto& c = pi.chart();
    for (int i = 0; i < 10; ++i) {
      const Expr f = testing::random_expr(rng, c, 2), g = testing::random_expr(rng, c, 2),
                 h = testing::random_expr(rng, c, 2);
      EXPECT_TRUE((bracket(pi, f, g) + bracket(pi, g, f)).is_zero());
      EXPECT_TRUE((bracket(pi, f, g * h) - bracket(pi, f, g) * h - g * bracket(pi, f, h)).is_zero());
      EXPECT_TRUE((bracket(pi, f, bracket(pi, g, h)) + bracket(pi, g, bracket(pi, h, f)) +
                   bracket(pi, h, bracket(pi, f, g)))
                      .is_zero());
    }
  }
}

TEST(Properties, CommutatorOfHamiltonianFields) {
  std::mt19937 rng(14);
  const auto pi = second_counterexample();
  const auto& c = pi.chart();
  for (int i = 0; i < 10; ++i) {
    const Expr f = testing::random_expr(rng, c, 2), g = testing::random_expr(rng, c, 2);
    const VectorField lhs = lie_bracket(hamiltonian_vf(pi, f), hamiltonian_vf(pi, g));
    const VectorField rhs = hamiltonian_vf(pi, bracket(pi, f, g));
    // With X_f[g] = {f,g}: [X_f, X_g] = X_{f,g}.
    for (std::size_t k = 0; k < 4; ++k) EXPECT_TRUE((lhs.components[k] - rhs.components[k]).is_zero());

    // With Y_f = {., f} = -X_f the same identity reads [Y_f, Y_g] = -Y_{f,g}.
    auto neg = [](VectorField v) {
      for (auto& e : v.components) e = -e;
      return v;
    };
    const VectorField lhs2 = lie_bracket(neg(hamiltonian_vf(pi, f)), neg(hamiltonian_vf(pi, g)));
    const VectorField rhs2 = neg(neg(hamiltonian_vf(pi, bracket(pi, f, g))));
    for (std::size_t k = 0; k < 4; ++k) EXPECT_TRUE((lhs2.components[k] - rhs2.components[k]).is_zero());
  }
}

}  // namespace
}  // namespace poisson
