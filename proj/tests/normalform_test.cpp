#include <gtest/gtest.h>

#include <random>

#include "poisson/normalform.hpp"
#include "support.hpp"

namespace poisson {
namespace {

using testing::make_bivector;
using testing::make_family;
using testing::origin;

Vec vec(std::initializer_list<double> v) {
  Vec out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Vec at(const Point& m) { return Eigen::Map<const Vec>(m.values.data(), m.size()); }

// ---------------------------------------------------------------- flows

TEST(Flow, ConstantFieldTranslates) {
  auto chart = Chart::make({"x", "y", "z"});
  const VectorField dy{chart, {Expr::zero(chart), Expr::constant(chart, 1), Expr::zero(chart)}};
  const Point y = flow(dy, origin(chart), 1.0);
  EXPECT_NEAR(y.values[0], 0, 1e-14);
  EXPECT_NEAR(y.values[1], 1, 1e-14);
  EXPECT_NEAR(y.values[2], 0, 1e-14);
}

TEST(Flow, MomentumFieldMovesQLinearly) {
  auto chart = Chart::make({"q", "p"});
  const Bivector pi = make_bivector(chart, {{"q", "p", "1"}});
  // X_p[q] = {p, q} = -1
  const VectorField xp = hamiltonian_vf(pi, parse("p", chart));
  for (double t : {-0.7, 0.3, 2.0}) {
    const Point y = flow(xp, Point(chart, {0.25, -1.5}), t);
    EXPECT_NEAR(y.values[0], 0.25 - t, 1e-12);
    EXPECT_NEAR(y.values[1], -1.5, 1e-12);
  }
}

TEST(Flow, ZeroTimeIsIdentityAndBackwardInverts) {
  const Bivector pi = testing::so3();
  const VectorField x = hamiltonian_vf(pi, parse("x^2 + 2*y^2 + x*z", pi.chart()));
  const Point m(pi.chart(), {0.3, -0.2, 0.5});
  const Point same = flow(x, m, 0.0);
  EXPECT_EQ(same.values, m.values);
  const Point back = flow(x, flow(x, m, 0.8), -0.8);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(back.values[i], m.values[i], 1e-11);
}

TEST(Flow, HamiltonianFlowIsPoisson) {
  // symplectic-invariance oracle: J pi(m) J^T = pi(phi_t(m)) with J by finite differences
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  const Bivector pis[] = {testing::so3(), testing::second_counterexample(), testing::z2_even_model()};
  const char* hamiltonians[] = {"x^2 + 2*y^2 + x*z", "x*p + q^2 + y", "q*p + z1^2 + z1*z2"};
  for (int k = 0; k < 3; ++k) {
    const Bivector& pi = pis[k];
    const CompiledField x(hamiltonian_vf(pi, parse(hamiltonians[k], pi.chart())));
    const FieldFn f = [&](const Vec& v) { return x(v); };
    for (int trial = 0; trial < 3; ++trial) {
      Vec m(pi.dim());
      for (Index i = 0; i < m.size(); ++i) m[i] = uni(rng);
      const double t = 0.4;
      const Mat j = linalg::fd_jacobian([&](const Vec& v) { return flow(f, v, t); }, m, 1e-5);
      const Vec y = flow(f, m, t);
      const Mat lhs = j * pi.matrix(std::span<const double>(m.data(), m.size())) * j.transpose();
      const Mat rhs = pi.matrix(std::span<const double>(y.data(), y.size()));
      EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-6) << hamiltonians[k];
    }
  }
}

TEST(Flow, ExcursionLimitRaises) {
  auto chart = Chart::make({"x"});
  const VectorField blowup{chart, {parse("x^2", chart)}};
  FlowOptions o;
  o.max_excursion = 10;
  EXPECT_THROW(flow(blowup, Point(chart, {1.0}), 2.0, o), FlowError);
}

TEST(Flow, CommutingHamiltonianFlowsCommute) {
  // property: involutive pairs give commuting flows, |t| <= 0.1
  struct Case {
    Bivector pi;
    std::string f, g;
  };
  const Case cases[] = {
      {testing::second_counterexample(), "x", "p + x*q"},
      {make_bivector(Chart::make({"q1", "p1", "q2", "p2"}), {{"q1", "p1", "1"}, {"q2", "p2", "1"}}), "p1*exp(p2)", "p2"},
      {testing::so3(), "x^2 + y^2 + z^2", "z"},
  };
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> pt(-0.3, 0.3), tm(-0.1, 0.1);
  for (const auto& c : cases) {
    const Expr f = parse(c.f, c.pi.chart()), g = parse(c.g, c.pi.chart());
    ASSERT_TRUE(bracket(c.pi, f, g).is_zero());
    for (int trial = 0; trial < 8; ++trial) {
      std::vector<double> x(c.pi.dim());
      for (auto& v : x) v = pt(rng);
      EXPECT_LE(flow_commutator(c.pi, f, g, Point(c.pi.chart(), x), tm(rng), tm(rng)), 1e-8) << c.g;
    }
  }
}

// ---------------------------------------------------------------- CJL charts

TEST(CjlChart, CanonicalPlaneIsAlreadyCanonical) {
  auto chart = Chart::make({"x", "y"});
  const Bivector pi = make_bivector(chart, {{"x", "y", "1"}});
  const NumericChart c = construct_cjl_chart(pi, make_family(chart, {"x"}), origin(chart));
  EXPECT_EQ(c.r(), 1);
  EXPECT_EQ(c.s(), 0);
  EXPECT_TRUE(c.diagnostics.passed);
  EXPECT_LT(c.diagnostics.max_residual, 1e-9);
  const Vec x = c.forward(vec({0.05, -0.08}));
  EXPECT_NEAR(x[0], 0.05, 1e-12);
  EXPECT_NEAR(std::abs(x[1]), 0.08, 1e-12);  // q = ±y
  EXPECT_EQ(c.coordinate_names(), (std::vector<std::string>{"p1", "q1"}));
}

TEST(CjlChart, ForwardOfZeroIsCenter) {
  const Bivector pi = testing::so3();
  const Point m(pi.chart(), {1, 0, 0});
  const NumericChart c = construct_cjl_chart(pi, make_family(pi.chart(), {"z"}), m);
  EXPECT_LT((c.forward(Vec::Zero(3)) - at(m)).norm(), 1e-12);
}

TEST(CjlChart, SecondCounterexampleHasProductZBlock) {
  const Bivector pi = testing::second_counterexample();
  const auto& chart = pi.chart();
  const NumericChart c = construct_cjl_chart(pi, make_family(chart, {"x"}), origin(chart));
  EXPECT_TRUE(c.diagnostics.passed) << c.diagnostics.max_residual;
  EXPECT_EQ(c.s(), 2);
  EXPECT_LE(c.diagnostics.roundtrip, 1e-8);
  // {z1, z2} equals ±p at the image point: the transverse structure is p ∂p∧∂q
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uni(-0.1, 0.1);
  for (int k = 0; k < 10; ++k) {
    const Vec u = vec({uni(rng), uni(rng), uni(rng), uni(rng)});
    const Mat b = c.bracket_matrix(pi, u);
    const Vec x = c.forward(u);
    EXPECT_NEAR(std::abs(b(2, 3)), std::abs(x[2]), 1e-7);
  }
}

TEST(CjlChart, So3AwayFromTheAxis) {
  const Bivector pi = testing::so3();
  const Point m(pi.chart(), {1, 0, 0});
  const NumericChart c = construct_cjl_chart(pi, make_family(pi.chart(), {"z"}), m);
  EXPECT_EQ(c.s(), 1);
  EXPECT_TRUE(c.diagnostics.passed) << c.diagnostics.max_residual;
  EXPECT_EQ(c.diagnostics.rank_at_center, 2);
  EXPECT_TRUE(c.diagnostics.rank_criterion);
}

TEST(CjlChart, RankCriterionBothWays) {
  const Bivector pi = testing::second_counterexample();
  const auto& chart = pi.chart();
  const auto p = make_family(chart, {"x"});
  const NumericChart degenerate = construct_cjl_chart(pi, p, origin(chart));
  EXPECT_LE(degenerate.diagnostics.center_z_norm, 1e-9);
  EXPECT_EQ(degenerate.diagnostics.rank_at_center, 2);

  const NumericChart regular = construct_cjl_chart(pi, p, Point(chart, {0, 0, 0.5, 0}));
  EXPECT_NEAR(regular.diagnostics.center_z_norm, 0.5, 1e-9);
  EXPECT_EQ(regular.diagnostics.rank_at_center, 4);
  EXPECT_TRUE(regular.diagnostics.rank_criterion);
  EXPECT_TRUE(regular.diagnostics.passed);
}

TEST(CjlChart, Preconditions) {
  const Bivector so3 = testing::so3();
  EXPECT_THROW(
      {
        try {
          construct_cjl_chart(so3, make_family(so3.chart(), {"z"}), Point(so3.chart(), {0, 0, 1}));
        } catch (const PreconditionError& e) {
          EXPECT_EQ(e.name(), "independent-fields");
          throw;
        }
      },
      PreconditionError);
  auto chart = Chart::make({"q1", "p1", "q2", "p2"});
  const Bivector r4 = make_bivector(chart, {{"q1", "p1", "1"}, {"q2", "p2", "1"}});
  EXPECT_THROW(
      {
        try {
          construct_cjl_chart(r4, make_family(chart, {"q1", "p1"}), origin(chart));
        } catch (const PreconditionError& e) {
          EXPECT_EQ(e.name(), "involutive");
          throw;
        }
      },
      PreconditionError);
}

TEST(CjlChart, AutoCentersP) {
  auto chart = Chart::make({"x", "y"});
  const Bivector pi = make_bivector(chart, {{"x", "y", "1"}});
  const NumericChart c = construct_cjl_chart(pi, make_family(chart, {"x + 1"}), origin(chart));
  EXPECT_TRUE(c.diagnostics.passed);
  EXPECT_NEAR(c.forward(vec({0.02, 0}))[0], 0.02, 1e-12);
}

TEST(CjlChart, TwoLevelsWithCoupledTransverseBlock) {
  auto chart = Chart::make({"q1", "p1", "q2", "p2", "z1", "z2"});
  const Bivector pi = make_bivector(chart, {{"q1", "p1", "1"}, {"q2", "p2", "1"}, {"z1", "z2", "z1"}});
  const auto p = make_family(chart, {"p1 + z1", "p2 + p1^2"});
  const NumericChart c = construct_cjl_chart(pi, p, origin(chart));
  EXPECT_EQ(c.r(), 2);
  EXPECT_EQ(c.s(), 2);
  EXPECT_TRUE(c.diagnostics.passed) << c.diagnostics.max_residual << " rt " << c.diagnostics.roundtrip;
  EXPECT_EQ(c.diagnostics.grid_points, 625);
}

TEST(CjlChart, InverseRoundTripProperty) {
  const Bivector pi = testing::second_counterexample();
  const auto& chart = pi.chart();
  const NumericChart c = construct_cjl_chart(pi, make_family(chart, {"x + p*y"}), origin(chart));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uni(-0.1, 0.1);
  for (int k = 0; k < 20; ++k) {
    const Vec u = vec({uni(rng), uni(rng), uni(rng), uni(rng)});
    EXPECT_LT((c.inverse(c.forward(u)) - u).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

// ---------------------------------------------------------------- equivariant

GroupAction flip(const ChartPtr& chart, const std::vector<std::string>& images) {
  std::vector<Expr> comps;
  for (const auto& e : images) comps.push_back(parse(e, chart));
  return GroupAction::finite(chart, {"e", "g"}, {{0, 1}, {1, 0}},
                             {SymbolicMap::identity(chart), SymbolicMap{chart, chart, comps}});
}

TEST(EquivariantChart, TrivialGroupMatchesCjl) {
  const Bivector pi = testing::second_counterexample();
  const auto& chart = pi.chart();
  const auto p = make_family(chart, {"x"});
  const NumericChart a = construct_cjl_chart(pi, p, origin(chart));
  const EquivariantChart b = construct_equivariant_chart(pi, p, GroupAction::trivial(chart), origin(chart));
  for (const auto& u : {vec({0.05, -0.02, 0.03, 0.01}), vec({-0.1, 0.1, 0.0, -0.04})})
    EXPECT_LT((a.forward(u) - b.chart.forward(u)).norm(), 1e-12);
  EXPECT_TRUE(b.linear);
}

TEST(EquivariantChart, FlipActsLinearlyInTheChart) {
  const Bivector pi = testing::z2_even_model();
  const auto& chart = pi.chart();
  const GroupAction g = flip(chart, {"q", "p", "-z1", "-z2"});
  const EquivariantChart e = construct_equivariant_chart(pi, make_family(chart, {"p"}), g, origin(chart));
  EXPECT_TRUE(e.poisson_action);
  EXPECT_TRUE(e.chart.diagnostics.passed) << e.chart.diagnostics.max_residual;
  ASSERT_EQ(e.action_matrices.size(), 2u);
  EXPECT_TRUE(e.action_matrices[1].isApprox(-Mat::Identity(2, 2)));
  EXPECT_LE(e.action_residual, 1e-8);
  EXPECT_TRUE(e.linear);
  // q is invariant
  const Vec x = e.chart.forward(vec({0.03, -0.05, 0.07, 0.02}));
  const Vec gx = vec({x[0], x[1], -x[2], -x[3]});
  EXPECT_NEAR(e.chart.inverse(gx)[1], e.chart.inverse(x)[1], 1e-9);
}

TEST(EquivariantChart, NonInvariantFamilyIsRejected) {
  const Bivector pi = testing::z2_even_model();
  const auto& chart = pi.chart();
  const GroupAction g = flip(chart, {"q", "p", "-z1", "-z2"});
  EXPECT_THROW(
      {
        try {
          construct_equivariant_chart(pi, make_family(chart, {"p + z1"}), g, origin(chart));
        } catch (const PreconditionError& e) {
          EXPECT_EQ(e.name(), "invariant-functions");
          throw;
        }
      },
      PreconditionError);
}

TEST(EquivariantChart, AntiPoissonActionReportedOrRejected) {
  const Bivector pi = testing::z2_model();
  const auto& chart = pi.chart();
  const GroupAction g = flip(chart, {"q", "p", "-z1", "-z2"});
  const auto p = make_family(chart, {"p"});
  EXPECT_THROW(construct_equivariant_chart(pi, p, g, origin(chart)), PreconditionError);
  EquivariantOptions o;
  o.require_poisson_action = false;
  const EquivariantChart e = construct_equivariant_chart(pi, p, g, origin(chart), o);
  EXPECT_FALSE(e.poisson_action);
  EXPECT_GT(e.poisson_residual, 1e-3);
}

TEST(EquivariantChart, NonlinearActionIsLinearized) {
  auto chart = Chart::make({"q", "p", "x", "y"});
  const Bivector pi = make_bivector(chart, {{"q", "p", "1"}});
  const GroupAction g = flip(chart, {"q", "p", "-x", "-y + x^2"});
  const EquivariantChart e = construct_equivariant_chart(pi, make_family(chart, {"p"}), g, origin(chart));
  EXPECT_TRUE(e.chart.diagnostics.passed);
  EXPECT_LE(e.action_residual, 1e-8);
  EXPECT_TRUE(e.action_matrices[1].isApprox(-Mat::Identity(2, 2)));
  EXPECT_TRUE(e.linear);
}

TEST(FoliatedChart, ProductFoliationGeneratedByPAndZ) {
  auto chart = Chart::make({"q", "p", "z1", "z2"});
  const Bivector pi = make_bivector(chart, {{"q", "p", "1"}, {"z1", "z2", "z1"}});
  const auto f = make_family(chart, {"p", "z1"});
  const NumericChart base = construct_cjl_chart(pi, make_family(chart, {"p"}), origin(chart));
  const NumericChart fol = foliate_chart(base, f, 1);
  const Vec x = vec({0.04, -0.03, 0.06, 0.02});
  const Vec u = fol.inverse(x);
  EXPECT_NEAR(u[0], -0.03, 1e-10);
  EXPECT_NEAR(u[2], 0.06, 1e-10);
  EXPECT_LT((fol.forward(u) - x).norm(), 1e-9);
  EXPECT_TRUE(verify_chart(pi, fol).passed);
}

}  // namespace
}  // namespace poisson
