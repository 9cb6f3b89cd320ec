#include <gtest/gtest.h>

#include "poisson/leaves.hpp"
#include "support.hpp"

namespace poisson {
namespace {

using namespace poisson::testing;

bool in_span(const Mat& basis, const Vec& v, double tol) { return (v - basis * (basis.transpose() * v)).norm() <= tol; }

TEST(LeafTangent, Examples) {
  const auto pi1 = first_counterexample();
  const Mat t1 = leaf_tangent_at(pi1, origin(pi1.chart()));
  ASSERT_EQ(t1.cols(), 2);
  EXPECT_TRUE(in_span(t1, Vec::Unit(4, 2), 1e-12));
  EXPECT_TRUE(in_span(t1, Vec::Unit(4, 3), 1e-12));

  auto c = Chart::make({"q", "p"});
  EXPECT_EQ(leaf_tangent_at(make_bivector(c, {{"q", "p", "1"}}), Point(c, {3, 4})).cols(), 2);

  const auto pi2 = second_counterexample();
  const Mat t2 = leaf_tangent_at(pi2, origin(pi2.chart()));
  ASSERT_EQ(t2.cols(), 2);
  EXPECT_TRUE(in_span(t2, Vec::Unit(4, 0), 1e-12));
  EXPECT_TRUE(in_span(t2, Vec::Unit(4, 1), 1e-12));
}

TEST(FRegular, FirstCounterexampleFails) {
  const auto pi = first_counterexample();
  const auto rep = f_regular_at(pi, make_family(pi.chart(), {"x*exp(p)", "y*exp(-q)"}), origin(pi.chart()));
  EXPECT_EQ(rep.intersection_dim, 2);
  EXPECT_EQ(rep.intersection_dim_stacked, 2);
  EXPECT_EQ(rep.r_prime, 1);
  EXPECT_FALSE(rep.f_regular);
  // The involutive pair under the library convention gives the same picture.
  const auto rep2 = f_regular_at(pi, make_family(pi.chart(), {"x*exp(p)", "y*exp(q)"}), origin(pi.chart()));
  EXPECT_EQ(rep2.intersection_dim, 2);
  EXPECT_FALSE(rep2.f_regular);
}

TEST(FRegular, SecondCounterexample) {
  const auto pi = second_counterexample();
  const auto f = make_family(pi.chart(), {"x", "p + x*q"});
  const auto at0 = f_regular_at(pi, f, origin(pi.chart()));
  EXPECT_EQ(at0.intersection_dim, 1);
  EXPECT_EQ(at0.r_prime, 1);
  EXPECT_TRUE(at0.f_regular);
  const auto reg = f_regular_at(pi, f, Point(pi.chart(), {0, 0, 1, 0}));
  EXPECT_EQ(reg.r_prime, 2);
  EXPECT_TRUE(reg.f_regular);
}

TEST(FRegular, SingularFoliationIsAnError) {
  auto c = Chart::make({"q", "p"});
  auto pi = make_bivector(c, {{"q", "p", "1"}});
  EXPECT_THROW(f_regular_at(pi, make_family(c, {"p^2"}), origin(c)), PreconditionError);
}

TEST(FRegular, TwoIntersectionMethodsAndBothConditionsAgree) {
  std::mt19937 rng(30);
  struct Case {
    Bivector pi;
    std::vector<std::string> f;
  };
  std::vector<Case> cases{{first_counterexample(), {"x*exp(p)", "y*exp(q)"}},
                          {second_counterexample(), {"x", "p + x*q"}},
                          {so3(), {"x^2 + y^2 + z^2"}},
                          {z2_model(), {"p", "z1"}}};
  for (const auto& cs : cases) {
    const auto f = make_family(cs.pi.chart(), cs.f);
    for (int i = 0; i < 20; ++i) {
      auto x = random_point(rng, cs.pi.dim(), 0.5);
      if (i < 3) std::fill(x.begin(), x.begin() + 2, 0.0);  // hit singular leaves
      const Point m(cs.pi.chart(), x);
      if (independence_rank_at(f, m) < static_cast<int>(f.size())) continue;
      const auto rep = f_regular_at(cs.pi, f, m);
      EXPECT_EQ(rep.intersection_dim, rep.intersection_dim_stacked);
      EXPECT_EQ(rep.f_regular, rep.restricted_rank == rep.r_prime) << cs.f[0] << " " << rep.intersection_dim << " " << rep.restricted_rank << " " << rep.r_prime << " " << m.values[0] << "," << m.values[1] << "," << m.values[2];
    }
  }
}

TEST(FRegular, RegularLeavesAreFRegular) {
  std::mt19937 rng(31);
  const auto pi = second_counterexample();
  const auto f = make_family(pi.chart(), {"x", "p + x*q"});
  for (int i = 0; i < 30; ++i) {
    const Point m(pi.chart(), random_point(rng, 4));
    if (rank_at(pi, m) != 4) continue;
    EXPECT_TRUE(f_regular_at(pi, f, m).f_regular);
  }
}

TEST(Transversal, ChartAndLift) {
  const auto pi = second_counterexample();
  const auto& c = pi.chart();
  Transversal t("T", {parse("x - 1", c), parse("y - x*p", c)}, Point(c, {1, 0, 0, 0}));
  EXPECT_EQ(t.coordinate_names(), (std::vector<std::string>{"p", "q"}));
  const Vec x = t.lift(Vec::Constant(2, 0.5));
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 0.5, 1e-14);
  const Mat v = t.tangent_basis(std::span<const double>(x.data(), 4));
  EXPECT_LE((t.jacobian(std::span<const double>(x.data(), 4)) * v).norm(), 1e-14);
  EXPECT_THROW(Transversal("bad", {parse("x - 1", c)}, origin(c)), PreconditionError);
  EXPECT_THROW(Transversal("dep", {parse("x", c), parse("2*x", c)}, origin(c)), PreconditionError);
}

TEST(Compatible, SecondCounterexampleTransversals) {
  const auto pi = second_counterexample();
  const auto& c = pi.chart();
  const auto f = make_family(c, {"x", "p + x*q"});
  std::mt19937 rng(32);
  for (double x0 : {0.0, 1.0}) {
    Transversal t("T", {parse("x", c) - Expr::constant(c, rationalize(x0)), parse("y", c)}, Point(c, {x0, 0, 0, 0}));
    std::vector<Point> samples;
    for (int i = 0; i < 10; ++i) {
      const auto u = random_point(rng, 2, 0.2);
      samples.emplace_back(c, std::vector<double>{x0, 0, u[0], u[1]});
    }
    const auto rep = compatible_transversal_check(pi, f, t, samples);
    EXPECT_TRUE(rep.compatible);
    EXPECT_EQ(rep.r, 2);
    EXPECT_EQ(rep.r_prime, 1);
    for (int k : rep.restricted_ranks) EXPECT_EQ(k, 1);
    for (int k : rep.leaf_dims) EXPECT_EQ(k, 1);
  }
  Transversal t0("T0", {parse("x", c), parse("y", c)}, origin(c));
  EXPECT_THROW(compatible_transversal_check(pi, f, t0, {Point(c, {1, 0, 0, 0})}), PreconditionError);
  Transversal tangent("Tf", {parse("x", c), parse("p + x*q", c)}, origin(c));
  EXPECT_THROW(compatible_transversal_check(pi, f, tangent, {origin(c)}), PreconditionError);
}

TEST(BuildCompatible, SecondCounterexample) {
  const auto pi = second_counterexample();
  const auto& c = pi.chart();
  const auto f = make_family(c, {"x", "p + x*q"});
  const auto ct = build_compatible_transversal(pi, f, origin(c));
  EXPECT_EQ(ct.pivots, std::vector<int>{0});
  ASSERT_EQ(ct.conjugates.size(), 1u);
  EXPECT_EQ(ct.conjugates[0], parse("y", c));
  EXPECT_EQ(ct.transversal.defining(), (std::vector<Expr>{parse("x", c), parse("y", c)}));

  const auto shifted = build_compatible_transversal(pi, f, origin(c), {1.0}, {0.0});
  EXPECT_EQ(shifted.transversal.defining()[0], parse("x - 1", c));
  EXPECT_NEAR(shifted.transversal.base().values[0], 1.0, 1e-14);
}

TEST(BuildCompatible, SymplecticPlaneGivesAPoint) {
  auto c = Chart::make({"q", "p"});
  auto pi = make_bivector(c, {{"q", "p", "1"}});
  const auto ct = build_compatible_transversal(pi, make_family(c, {"p"}), origin(c));
  EXPECT_EQ(ct.transversal.dim(), 0u);
  EXPECT_EQ(ct.transversal.defining()[0], parse("p", c));
  EXPECT_EQ(ct.transversal.defining()[1], parse("-q", c));  // X_p = -d/dq
}

TEST(BuildCompatible, FirstCounterexampleFails) {
  const auto pi = first_counterexample();
  try {
    build_compatible_transversal(pi, make_family(pi.chart(), {"x*exp(p)", "y*exp(-q)"}), origin(pi.chart()));
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_EQ(e.name(), "f-regular");
  }
}

TEST(BuildCompatible, OutputPassesCompatibilityCheck) {
  std::mt19937 rng(33);
  struct Case {
    Bivector pi;
    std::vector<std::string> f;
    std::vector<double> s;
  };
  std::vector<Case> cases{{second_counterexample(), {"x", "p + x*q"}, {0, 0, 0, 0}},
                          {second_counterexample(), {"x", "p + x*q"}, {0.2, -0.1, 0, 0.3}},
                          {z2_model(), {"p", "z1"}, {0, 0, 0, 0}},
                          {so3(), {"x^2 + y^2 + z^2", "z"}, {1, 0, 0}}};
  for (const auto& cs : cases) {
    const auto f = make_family(cs.pi.chart(), cs.f);
    const auto ct = build_compatible_transversal(cs.pi, f, Point(cs.pi.chart(), cs.s));
    const auto& t = ct.transversal;
    std::vector<Point> samples;
    const Vec u0 = t.coordinates_of(t.base().span());
    for (int i = 0; i < 10; ++i) {
      Vec u = u0;
      for (Index k = 0; k < u.size(); ++k) u[k] += std::uniform_real_distribution<double>(-0.05, 0.05)(rng);
      const Vec x = t.lift(u);
      samples.emplace_back(cs.pi.chart(), std::vector<double>(x.data(), x.data() + x.size()));
    }
    EXPECT_TRUE(compatible_transversal_check(cs.pi, f, t, samples).compatible);
    // conjugacy {f_i, g_j}(s) = delta_ij
    for (std::size_t i = 0; i < ct.pivots.size(); ++i)
      for (std::size_t j = 0; j < ct.conjugates.size(); ++j)
        EXPECT_NEAR(evaluate(bracket(cs.pi, f[ct.pivots[i]], ct.conjugates[j]), Point(cs.pi.chart(), cs.s)),
                    i == j ? 1.0 : 0.0, 1e-12);
  }
}

}  // namespace
}  // namespace poisson
