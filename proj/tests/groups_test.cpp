#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "poisson/groups.hpp"
#include "support.hpp"

namespace poisson {
namespace {

using namespace poisson::testing;

SymbolicMap map_of(const ChartPtr& c, const std::vector<std::string>& comps) {
  SymbolicMap m{c, c, {}};
  for (const auto& s : comps) m.components.push_back(parse(s, c));
  return m;
}

GroupAction z2(const ChartPtr& c, const std::vector<std::string>& flip) {
  return GroupAction::finite(c, {"e", "s"}, {{0, 1}, {1, 0}}, {SymbolicMap::identity(c), map_of(c, flip)});
}

GroupAction z4_rotation() {
  auto c = so3().chart();
  return GroupAction::finite(c, {"e", "r", "r2", "r3"}, {{0, 1, 2, 3}, {1, 2, 3, 0}, {2, 3, 0, 1}, {3, 0, 1, 2}},
                             {SymbolicMap::identity(c), map_of(c, {"-y", "x", "z"}), map_of(c, {"-x", "-y", "z"}),
                              map_of(c, {"y", "-x", "z"})});
}

std::vector<Point> samples(const ChartPtr& c, int k, double w, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<Point> out;
  for (int i = 0; i < k; ++i) out.emplace_back(c, random_point(rng, c->size(), w));
  return out;
}

TEST(GroupTable, RejectsNonGroups) {
  auto c = Chart::make({"z"});
  auto id = SymbolicMap::identity(c);
  EXPECT_THROW(GroupAction::finite(c, {"a", "b"}, {{0, 0}, {0, 0}}, {id, id}), Error);  // no identity
  EXPECT_THROW(GroupAction::finite(c, {"e", "a", "b"}, {{0, 1, 2}, {1, 1, 1}, {2, 1, 2}}, {id, id, id}), Error);
  EXPECT_THROW(GroupAction::finite(c, {"e"}, {{0}}, {}), Error);
}

TEST(VerifyAction, Examples) {
  auto c = Chart::make({"z1", "z2"});
  EXPECT_TRUE(verify_action(z2(c, {"-z1", "-z2"}), samples(c, 5, 1, 1)).ok);
  EXPECT_FALSE(verify_action(z2(c, {"z1 + 1", "z2"}), samples(c, 5, 1, 1)).ok);
  auto g4 = z4_rotation();
  EXPECT_TRUE(verify_action(g4, samples(g4.chart(), 5, 1, 2)).ok);
  EXPECT_EQ(g4.inverse(1), 3);
  EXPECT_EQ(g4.identity(), 0);
}

TEST(PreservesPoisson, Examples) {
  auto c = Chart::make({"z1", "z2"});
  auto pi = make_bivector(c, {{"z1", "z2", "z1"}});
  const auto pts = samples(c, 5, 1, 3);
  // J pi J^T = pi(m) = z1 but pi at the image is -z1: the full flip reverses the bracket.
  EXPECT_FALSE(preserves_poisson(z2(c, {"-z1", "-z2"}), pi, pts).ok);
  EXPECT_TRUE(preserves_poisson(z2(c, {"-z1", "z2"}), pi, pts).ok);
  EXPECT_FALSE(preserves_poisson(z2(c, {"z1", "-z2"}), pi, pts).ok);
  EXPECT_TRUE(preserves_poisson(z2(c, {"-z1", "-z2"}), Bivector(c), pts).ok);

  const auto model = z2_model();
  EXPECT_FALSE(preserves_poisson(z2(model.chart(), {"q", "p", "-z1", "-z2"}), model, samples(model.chart(), 5, 1, 4)).ok);
  const auto even = z2_even_model();
  EXPECT_TRUE(preserves_poisson(z2(even.chart(), {"q", "p", "-z1", "-z2"}), even, samples(even.chart(), 5, 1, 4)).ok);
  auto g4 = z4_rotation();
  EXPECT_TRUE(preserves_poisson(g4, so3(), samples(g4.chart(), 5, 1, 5)).ok);
}

TEST(HaarAverage, Examples) {
  auto c = Chart::make({"z1", "z2"});
  const auto g = z2(c, {"-z1", "-z2"});
  EXPECT_TRUE(haar_average(g, parse("z1", c)).is_zero());
  EXPECT_EQ(haar_average(g, parse("z1^2", c)), parse("z1^2", c));
  EXPECT_EQ(haar_average(g, parse("z1^2 + z1", c)), parse("z1^2", c));
  EXPECT_EQ(haar_average(g, parse("exp(z1)", c)), parse("exp(z1)/2 + exp(-z1)/2", c));

  const auto bad = z2(c, {"exp(z1)", "z2"});
  EXPECT_THROW(haar_average(bad, parse("exp(z1)", c)), ClassError);
}

TEST(HaarAverage, IdempotentAndInvariant) {
  std::mt19937 rng(50);
  auto c = Chart::make({"z1", "z2"});
  const auto g2 = z2(c, {"-z1", "-z2"});
  const auto g4 = z4_rotation();
  for (int i = 0; i < 30; ++i) {
    const Expr f = random_expr(rng, c);
    const Expr a = haar_average(g2, f);
    EXPECT_EQ(haar_average(g2, a), a);
    EXPECT_TRUE(is_invariant(g2, a));
    const Expr h = random_expr(rng, g4.chart());
    const Expr b = haar_average(g4, h);
    EXPECT_EQ(haar_average(g4, b), b);
    EXPECT_TRUE(is_invariant(g4, b));
  }
}

TEST(HaarAverage, BracketsWithInvariantsAreEquivariant) {
  // For a Poisson action, g*{f, p} = {g*f, p} when p is invariant.
  std::mt19937 rng(51);
  const auto pi = z2_model();
  const auto& c = pi.chart();
  const auto g = z2(c, {"q", "p", "-z1", "-z2"});
  const Expr p = parse("p", c);
  for (int i = 0; i < 20; ++i) {
    const Expr f = random_expr(rng, c, 2);
    for (const auto& map : g.maps())
      EXPECT_EQ(map.pullback(bracket(pi, f, p)), bracket(pi, map.pullback(f), p));
  }
}

TEST(Circle, QuadratureAverage) {
  auto c = Chart::make({"x", "y"});
  Mat k(2, 2);
  k << 0, -1, 1, 0;
  const auto g = GroupAction::circle(c, k, 64);
  EXPECT_EQ(g.kind(), GroupAction::Kind::circle);
  EXPECT_EQ(g.order(), 64u);
  EXPECT_TRUE(verify_action(g, samples(c, 3, 1, 6)).ok);
  const Expr a = haar_average(g, parse("x^2", c));
  const std::vector<double> pt{0.3, -0.4};
  EXPECT_NEAR(a.evaluate(pt), 0.5 * (0.09 + 0.16), 1e-10);
  EXPECT_NEAR(haar_average(g, parse("x", c)).evaluate(pt), 0.0, 1e-10);
}

TEST(Bochner, LinearActionGivesIdentity) {
  auto c = Chart::make({"z1", "z2"});
  const auto g = z2(c, {"-z1", "-z2"});
  const auto b = bochner_linearize(g, origin(c), samples(c, 5, 0.1, 7));
  EXPECT_TRUE(b.exact);
  EXPECT_EQ(b.phi.components[0], parse("z1", c));
  EXPECT_EQ(b.phi.components[1], parse("z2", c));
  EXPECT_TRUE(b.certificate.ok);
}

TEST(Bochner, NonlinearInvolution) {
  auto c = Chart::make({"x", "y"});
  const auto g = z2(c, {"-x", "-y + x^2"});
  ASSERT_TRUE(verify_action(g, samples(c, 5, 1, 8)).ok);
  const auto b = bochner_linearize(g, origin(c), samples(c, 20, 0.1, 9));
  EXPECT_EQ(b.phi.components[0], parse("x", c));
  EXPECT_EQ(b.phi.components[1], parse("y - x^2/2", c));
  EXPECT_LE(b.certificate.conjugation_residual, 1e-8);
  EXPECT_LE(b.certificate.homomorphism_residual, 1e-9);
  EXPECT_TRUE(b.certificate.ok);
}

TEST(Bochner, NotAFixedPoint) {
  auto c = Chart::make({"z1", "z2"});
  const auto g = z2(c, {"-z1", "-z2"});
  try {
    bochner_linearize(g, Point(c, {1, 0}), {});
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_EQ(e.name(), "fixed-point");
  }
}

TEST(Bochner, Z4Homomorphism) {
  const auto g = z4_rotation();
  const auto b = bochner_linearize(g, Point(g.chart(), {0, 0, 0.5}), samples(g.chart(), 10, 0.1, 10));
  EXPECT_TRUE(b.certificate.ok);
  EXPECT_LE(homomorphism_residual(g, b.certificate.matrices), 1e-12);
}

}  // namespace
}  // namespace poisson
