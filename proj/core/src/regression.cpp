#include "poisson/regression.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "poisson/dirac.hpp"
#include "poisson/flow.hpp"
#include "poisson/leaves.hpp"
#include "poisson/model.hpp"
#include "poisson/normalform.hpp"
#include "poisson/split.hpp"

namespace poisson::regression {

namespace {

using Json = Report::Json;

// Collects named checks; the criterion passes when none failed.
struct Checks {
  std::vector<std::string> failed;
  Json details = Json::object();

  void expect(const std::string& name, bool ok) {
    if (!ok) failed.push_back(name);
  }
  bool ok() const { return failed.empty(); }
};

Point at(const Model& m, std::vector<double> v) { return Point(m.chart, std::move(v)); }

std::vector<double> uniform_point(std::mt19937_64& rng, std::size_t n, double half_width) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

Rational random_rational(std::mt19937_64& rng, int max_num, int max_den) {
  std::uniform_int_distribution<int> num(-max_num, max_num), den(1, max_den);
  int n = 0;
  while (n == 0) n = num(rng);
  Rational q(n, den(rng));
  q.canonicalize();
  return q;
}

bool same_field(const VectorField& a, const VectorField& b) {
  for (std::size_t k = 0; k < a.components.size(); ++k)
    if (a.components[k] != b.components[k]) return false;
  return true;
}

VectorField negated(VectorField v) {
  for (auto& e : v.components) e = -e;
  return v;
}

std::string join(const std::vector<Expr>& es) {
  std::string s;
  for (const auto& e : es) s += (s.empty() ? "" : ", ") + e.str();
  return s;
}

// ---------------------------------------------------------------- 1

void counterexamples(Checks& c, std::uint64_t) {
  const Model first = load_model("builtin:first");
  const bool first_jacobi = all_zero(jacobiator(first.pi));
  const Point origin1 = first.point("origin");
  const RegularityReport reg = f_regular_at(first.pi, first.family({"f1", "f2"}), origin1);
  const auto plus = is_involutive(first.pi, first.family({"f1", "f2"}));
  const auto minus = is_involutive(first.pi, first.family({"f1", "f2_minus"}));
  c.expect("first.jacobi", first_jacobi);
  c.expect("first.intersection_dim", reg.intersection_dim == 2);
  c.expect("first.r_prime", reg.r_prime == 1);
  c.expect("first.f_regular", !reg.f_regular);
  c.expect("first.exactly_one_involutive", plus.involutive != minus.involutive);
  Json involutive_pair = plus.involutive ? "x*exp(p), y*exp(q)" : "x*exp(p), y*exp(-q)";
  const auto& bad = plus.involutive ? minus : plus;
  c.details["first"] = {{"jacobi_zero", first_jacobi},
                        {"intersection_dim", reg.intersection_dim},
                        {"r_prime", reg.r_prime},
                        {"f_regular", reg.f_regular},
                        {"involutive_pair", involutive_pair},
                        {"other_pair_bracket", bad.failures.empty() ? "" : bad.failures.front().bracket.str()}};

  const Model second = load_model("builtin:second");
  const FunctionFamily f = second.system_family();
  const Point origin2 = second.point("origin");
  const bool second_jacobi = all_zero(jacobiator(second.pi));
  const bool involutive = is_involutive(second.pi, f).involutive;
  c.expect("second.jacobi", second_jacobi);
  c.expect("second.involutive", involutive);

  const SplitVerdict v = split_test(second.pi, f, origin2);
  c.expect("second.split_test", v.status == SplitStatus::unsplit_witness);
  Json verdict = {{"status", to_string(v.status)}, {"r_prime", v.r_prime}, {"note", v.note}};
  if (v.comparison) {
    const bool t0 = v.comparison->first.tangency == Tangency::tangent;
    const bool t1 = v.comparison->second.tangency == Tangency::tangent;
    c.expect("second.split_test.invariants", t0 && !t1 && v.comparison->second.tangency == Tangency::not_tangent);
    verdict["invariants"] = {t0, t1};
  } else {
    c.expect("second.split_test.comparison", false);
  }
  const auto t0 = build_compatible_transversal(second.pi, f, origin2, {}, {}, "T0");
  const auto t1 = build_compatible_transversal(second.pi, f, origin2, {1.0}, {}, "T1");
  verdict["transversals"] = {join(t0.transversal.defining()), join(t1.transversal.defining())};

  // The declared transversals {x = 0, y = 0} and {x = 1, y = 0}.
  Json declared = Json::object();
  for (const char* name : {"T0", "T1"}) {
    const auto inv = transversal_invariant(second.pi, f, second.transversal(name));
    declared[name] = {{"define", join(second.transversal(name).defining())},
                      {"tangent", inv.tangency == Tangency::tangent},
                      {"tangency", to_string(inv.tangency)},
                      {"generic_rank", inv.generic_rank}};
  }
  c.expect("second.declared_invariants",
           declared["T0"]["tangency"] == "tangent" && declared["T1"]["tangency"] == "not-tangent");
  c.details["second"] = {{"jacobi_zero", second_jacobi},
                         {"involutive", involutive},
                         {"split_test", verdict},
                         {"declared", declared}};
}

// ---------------------------------------------------------------- 2

Json chart_summary(const NumericChart& ch) {
  const auto& d = ch.diagnostics;
  return {{"r", ch.r()},
          {"s", ch.s()},
          {"grid_points", d.grid_points},
          {"half_width", Report::num(d.half_width)},
          {"max_residual", Report::num(d.max_residual)},
          {"pp", Report::num(d.pp)},
          {"pq", Report::num(d.pq)},
          {"qq", Report::num(d.qq)},
          {"pz", Report::num(d.pz)},
          {"qz", Report::num(d.qz)},
          {"dg_dp", Report::num(d.dg_dp)},
          {"dg_dq", Report::num(d.dg_dq)},
          {"roundtrip", Report::num(d.roundtrip)},
          {"center_z_norm", Report::num(d.center_z_norm)},
          {"rank_at_center", d.rank_at_center},
          {"rank_criterion", d.rank_criterion},
          {"passed", d.passed}};
}

void cjl_charts(Checks& c, std::uint64_t) {
  struct Case {
    const char* label;
    const char* model;
    std::vector<std::string> p;
    const char* point;
  };
  const std::vector<Case> cases = {{"second.origin", "second", {"x"}, "origin"},
                                   {"second.regular", "second", {"x"}, "regular"},
                                   {"so3.e1", "so3", {"z"}, "e1"}};
  for (const auto& k : cases) {
    const Model m = load_model(std::string("builtin:") + k.model);
    const NumericChart ch = construct_cjl_chart(m.pi, m.family(k.p), m.point(k.point));
    const auto& d = ch.diagnostics;
    const int n = static_cast<int>(ch.dim());
    const int grid = static_cast<int>(std::pow(5, std::min(n, 4)));
    const std::string l = k.label;
    c.expect(l + ".max_residual", d.max_residual <= 1e-6);
    c.expect(l + ".rank_criterion", d.rank_criterion);
    c.expect(l + ".grid", d.grid_points == grid && d.half_width == 0.1);
    c.expect(l + ".passed", d.passed);
    c.details[l] = chart_summary(ch);
  }
}

// ---------------------------------------------------------------- 3

void equivariant_charts(Checks& c, std::uint64_t seed) {
  struct Case {
    const char* model;
    bool require_poisson;
  };
  for (const Case k : {Case{"z2", false}, Case{"z2_even", true}}) {
    const Model m = load_model(std::string("builtin:") + k.model);
    const GroupAction& g = m.group("flip");
    EquivariantOptions o;
    o.require_poisson_action = k.require_poisson;
    o.action_samples = 20;
    o.seed = seed;
    const EquivariantChart e = construct_equivariant_chart(m.pi, m.family({"p"}), g, m.point("origin"), o);
    const NumericChart& ch = e.chart;
    const std::size_t n = ch.dim(), s = static_cast<std::size_t>(ch.s());
    double matrix_residual = 0;
    Json matrices = Json::object();
    for (std::size_t a = 0; a < g.order(); ++a) {
      Mat full = Mat::Identity(n, n);
      full.bottomRightCorner(s, s) = e.action_matrices[a];
      Mat expected = Mat::Identity(n, n);
      if (g.element(a) == "g") expected.bottomRightCorner(2, 2) *= -1.0;
      matrix_residual = std::max(matrix_residual, (full - expected).cwiseAbs().maxCoeff());
      matrices[g.element(a)] = Report::mat(full);
    }
    const std::string l = m.name;
    c.expect(l + ".diagnostics", ch.diagnostics.passed);
    c.expect(l + ".matrices", matrix_residual <= 1e-8);
    c.expect(l + ".action_residual", e.action_residual <= 1e-8);
    c.expect(l + ".homomorphism", e.homomorphism_residual <= 1e-9);
    c.details[l] = {{"poisson_action_required", k.require_poisson},
                    {"poisson_action", e.poisson_action},
                    {"poisson_residual", Report::num(e.poisson_residual)},
                    {"chart", chart_summary(ch)},
                    {"action_matrices", matrices},
                    {"matrix_residual", Report::num(matrix_residual)},
                    {"action_residual", Report::num(e.action_residual)},
                    {"action_samples", o.action_samples},
                    {"homomorphism_residual", Report::num(e.homomorphism_residual)}};
  }
}

// ---------------------------------------------------------------- 4

void averaging(Checks& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed + 4);
  for (const auto& [model, group] : {std::pair{"z2", "flip"}, std::pair{"z4", "rotation"}}) {
    const Model m = load_model(std::string("builtin:") + model);
    const GroupAction& g = m.group(group);
    int idempotent = 0, invariant = 0;
    const int count = 100;
    for (int i = 0; i < count; ++i) {
      const Expr f = random_expression(rng, m.chart);
      const Expr avg = haar_average(g, f);
      if (haar_average(g, avg) == avg) ++idempotent;
      bool inv = true;
      for (const auto& map : g.maps()) inv = inv && map.pullback(avg) == avg;
      if (inv) ++invariant;
    }
    const std::string l = m.name;
    c.expect(l + ".idempotent", idempotent == count);
    c.expect(l + ".invariant", invariant == count);
    c.details[l] = {{"group", group}, {"order", g.order()}, {"expressions", count},
                    {"idempotent", idempotent}, {"invariant", invariant}};
  }
}

// ---------------------------------------------------------------- 5

void dirac_suite(Checks& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed + 5);

  struct Case {
    const char* model;
    const char* point;
  };
  const std::vector<std::vector<double>> offsets_a = {{0.0}, {0.5}, {-0.5}};
  const std::vector<std::vector<double>> offsets_b = {{0.0}, {0.25}};
  Json brackets = Json::object();
  double worst = 0;
  for (const Case k : {Case{"second", "origin"}, Case{"product_split", "origin"}, Case{"product", "origin"},
                       Case{"so3", "e1"}}) {
    const Model m = load_model(std::string("builtin:") + k.model);
    const FunctionFamily f = m.system_family();
    const Point s = m.point(k.point);
    std::vector<Transversal> ts = m.transversals;
    for (const auto& a : offsets_a)
      for (const auto& b : offsets_b) {
        const std::string name = "T_A" + Report::num(a[0]).dump() + "_B" + Report::num(b[0]).dump();
        ts.push_back(build_compatible_transversal(m.pi, f, s, a, b, name).transversal);
      }
    Json per = Json::object();
    for (const auto& t : ts) {
      double max_abs = 0;
      int evaluations = 0, failures = 0;
      const Vec u0 = t.coordinates_of(t.base().span());
      for (int i = 0; i < 8; ++i) {
        const auto du = uniform_point(rng, t.dim(), 0.1);
        Vec u = u0;
        for (std::size_t j = 0; j < t.dim(); ++j) u[j] += du[j];
        const Vec x = t.lift(u);
        const Point pt(m.chart, std::vector<double>(x.data(), x.data() + x.size()));
        for (std::size_t a = 0; a < f.size(); ++a)
          for (std::size_t b = a + 1; b < f.size(); ++b) {
            try {
              max_abs = std::max(max_abs, std::abs(bracket_on_transversal(m.pi, t, f, f[a], f[b], pt)));
              ++evaluations;
            } catch (const Error&) {
              ++failures;
            }
          }
      }
      worst = std::max(worst, max_abs);
      c.expect(m.name + "." + t.name() + ".bracket", max_abs <= 1e-8 && failures == 0);
      per[t.name()] = {{"define", join(t.defining())}, {"max_abs", Report::num(max_abs)},
                       {"evaluations", evaluations}, {"failures", failures}};
    }
    brackets[m.name] = per;
  }
  c.details["bracket_on_transversal"] = brackets;
  c.details["bracket_on_transversal_max"] = Report::num(worst);

  // Gauge: B = 0 is the identity, and gauging by B1 then B2 equals gauging by B1 + B2.
  Json gauge = Json::object();
  for (const char* model : {"second", "first", "product"}) {
    const Model m = load_model(std::string("builtin:") + model);
    const auto& ch = m.chart;
    TwoForm zero(ch), b1(ch), b2(ch);
    b1.set(0, 1, parse(ch->name(2), ch));
    b1.set(2, 3, parse("1/3", ch));
    b2.set(1, 3, parse(ch->name(0) + " - 1/2", ch));
    if (!m.two_forms.empty()) b2 = m.two_forms.front().second;
    double identity = 0, composition = 0;
    for (int i = 0; i < 50; ++i) {
      const Point x(ch, uniform_point(rng, ch->size(), 0.5));
      const Mat p = m.pi.matrix(x);
      identity = std::max(identity, (gauge_transform_at(m.pi, zero, x) - p).norm());
      const Mat lhs = gauge_transform(gauge_transform_at(m.pi, b1, x), b2.matrix(x));
      const Mat rhs = gauge_transform(p, b1.matrix(x) + b2.matrix(x));
      composition = std::max(composition, (lhs - rhs).norm());
    }
    c.expect(m.name + ".gauge_identity", identity <= 1e-9);
    c.expect(m.name + ".gauge_composition", composition <= 1e-9);
    gauge[m.name] = {{"points", 50}, {"identity", Report::num(identity)}, {"composition", Report::num(composition)}};
  }
  c.details["gauge"] = gauge;

  // Induced bivector on {x = 0, y = 0} of the second counterexample.
  const Model second = load_model("builtin:second");
  const Transversal& t0 = second.transversal("T0");
  const Mat canonical = (Mat(2, 2) << 0, 1, -1, 0).finished();
  double induced = 0;
  for (int i = 0; i < 10; ++i) {
    const auto u = uniform_point(rng, 2, 0.5);
    const Mat a = induced_bivector_at(second.pi, t0, at(second, {0, 0, u[0], u[1]}));
    induced = std::max(induced, (a - u[0] * canonical).norm());
  }
  c.expect("second.T0.induced", induced <= 1e-10);
  c.details["induced_T0"] = {{"coordinates", t0.coordinate_names()},
                             {"points", 10},
                             {"max_deviation_from_p_canonical", Report::num(induced)}};
}

// ---------------------------------------------------------------- 6

void algebra(Checks& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed + 6);
  Json identities = Json::object();
  for (const char* model : {"first", "second", "so3", "z2_even", "canonical4"}) {
    const Model m = load_model(std::string("builtin:") + model);
    const bool poisson = all_zero(jacobiator(m.pi));
    int antisymmetry = 0, leibniz = 0, jacobi = 0, commutator = 0, commutator_opposite = 0;
    const int triples = 15, pairs = 10;
    for (int i = 0; i < triples; ++i) {
      const Expr f = random_expression(rng, m.chart, 2), g = random_expression(rng, m.chart, 2),
                 h = random_expression(rng, m.chart, 2);
      if ((bracket(m.pi, f, g) + bracket(m.pi, g, f)).is_zero()) ++antisymmetry;
      if ((bracket(m.pi, f, g * h) - bracket(m.pi, f, g) * h - g * bracket(m.pi, f, h)).is_zero()) ++leibniz;
      if ((bracket(m.pi, f, bracket(m.pi, g, h)) + bracket(m.pi, g, bracket(m.pi, h, f)) +
           bracket(m.pi, h, bracket(m.pi, f, g)))
              .is_zero())
        ++jacobi;
    }
    for (int i = 0; i < pairs; ++i) {
      const Expr f = random_expression(rng, m.chart, 2), g = random_expression(rng, m.chart, 2);
      const VectorField xf = hamiltonian_vf(m.pi, f), xg = hamiltonian_vf(m.pi, g);
      const VectorField xfg = hamiltonian_vf(m.pi, bracket(m.pi, f, g));
      // X_f[g] = {f, g}: [X_f, X_g] = X_{f,g}; for Y_f = {., f}: [Y_f, Y_g] = -Y_{f,g}.
      if (same_field(lie_bracket(xf, xg), xfg)) ++commutator;
      if (same_field(lie_bracket(negated(xf), negated(xg)), negated(negated(xfg)))) ++commutator_opposite;
    }
    const std::string l = m.name;
    c.expect(l + ".poisson", poisson);
    c.expect(l + ".antisymmetry", antisymmetry == triples);
    c.expect(l + ".leibniz", leibniz == triples);
    c.expect(l + ".jacobi", jacobi == triples);
    c.expect(l + ".commutator", commutator == pairs && commutator_opposite == pairs);
    identities[l] = {{"poisson", poisson},          {"triples", triples},
                     {"antisymmetry", antisymmetry}, {"leibniz", leibniz},
                     {"jacobi", jacobi},             {"pairs", pairs},
                     {"commutator", commutator},     {"commutator_opposite", commutator_opposite}};
  }
  c.details["identities"] = identities;

  struct Pair {
    const char* model;
    const char* f;
    const char* g;
  };
  Json flows = Json::object();
  for (const Pair k : {Pair{"second", "f1", "f2"}, Pair{"first", "f1", "f2"}, Pair{"so3", "casimir", "h"},
                       Pair{"canonical4", "h", "p2"}}) {
    const Model m = load_model(std::string("builtin:") + k.model);
    std::uniform_real_distribution<double> time(-0.5, 0.5);
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
      const Point x(m.chart, uniform_point(rng, m.chart->size(), 0.3));
      const double s = time(rng), t = time(rng);
      worst = std::max(worst, flow_commutator(m.pi, m.function(k.f), m.function(k.g), x, s, t));
    }
    const std::string l = m.name + "." + k.f + "," + k.g;
    c.expect(l + ".flow_commutation", worst <= 1e-8);
    flows[l] = {{"samples", 10}, {"max_defect", Report::num(worst)}};
  }
  // Polynomials in the members of an involutive system commute as well.
  std::uniform_int_distribution<int> power(0, 2);
  for (const char* model : {"first", "second", "so3", "canonical4"}) {
    const Model m = load_model(std::string("builtin:") + model);
    const FunctionFamily sys = m.system_family();
    auto combination = [&] {
      Expr e = sys[0];
      for (int t = 0; t < 2; ++t) {
        Expr term = Expr::constant(m.chart, random_rational(rng, 2, 2));
        for (std::size_t i = 0; i < sys.size(); ++i) term = term * sys[i].pow(static_cast<unsigned>(power(rng)));
        e = e + term;
      }
      return e;
    };
    std::uniform_real_distribution<double> time(-0.3, 0.3);
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
      const Expr f = combination(), g = combination() - sys[0] + sys[sys.size() - 1];
      const Point x(m.chart, uniform_point(rng, m.chart->size(), 0.2));
      worst = std::max(worst, flow_commutator(m.pi, f, g, x, time(rng), time(rng)));
    }
    const std::string l = m.name + ".random_combinations";
    c.expect(l + ".flow_commutation", worst <= 1e-8);
    flows[l] = {{"samples", 10}, {"max_defect", Report::num(worst)}};
  }
  // Control: rotations about different axes must not commute.
  const Model so3 = load_model("builtin:so3");
  const double control =
      flow_commutator(so3.pi, so3.function("x"), so3.function("y"), so3.point("0.2, 0.1, 0.3"), 0.3, 0.3);
  c.expect("so3.x,y.control", control > 1e-4);
  flows["so3.x,y.control"] = {{"expected", "nonzero"}, {"defect", Report::num(control)}};
  c.details["flow_commutation"] = flows;
}

struct Definition {
  const char* title;
  double limit;  // seconds; 0 for none
  void (*run)(Checks&, std::uint64_t);
};

const Definition kDefinitions[kCriteria] = {
    {"counterexample regressions", 5, counterexamples},
    {"splitting charts and rank criterion", 60, cjl_charts},
    {"equivariant charts", 60, equivariant_charts},
    {"averaging identities", 0, averaging},
    {"transversal brackets and gauge", 0, dirac_suite},
    {"core algebra properties", 120, algebra},
};

}  // namespace

Expr random_expression(std::mt19937_64& rng, const ChartPtr& chart, int max_terms, bool with_exp) {
  const std::size_t n = chart->size();
  std::uniform_int_distribution<int> nterms(1, max_terms), power(0, 2);
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
    e.add_term(m, l, random_rational(rng, 4, 3));
  }
  return e;
}

CriterionResult run_criterion(int id, std::uint64_t seed) {
  if (id < 1 || id > kCriteria) throw Error("no regression criterion " + std::to_string(id));
  const Definition& def = kDefinitions[id - 1];
  CriterionResult out;
  out.id = id;
  out.title = def.title;
  out.limit_seconds = def.limit;
  Checks c;
  const auto start = std::chrono::steady_clock::now();
  bool threw = false;
  try {
    def.run(c, seed);
  } catch (const std::exception& e) {
    threw = true;
    out.summary = std::string("error: ") + e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = def.limit <= 0 || out.seconds < def.limit;
  out.pass = !threw && c.ok() && in_time;
  if (!threw) {
    if (!c.ok()) {
      out.summary = "failed:";
      for (const auto& f : c.failed) out.summary += " " + f;
    } else if (!in_time) {
      out.summary = "over time limit";
    } else {
      out.summary = "ok";
    }
  }
  out.details = std::move(c.details);
  out.details["failed_checks"] = c.failed;
  return out;
}

std::vector<CriterionResult> run_all(std::uint64_t seed) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriteria; ++id) out.push_back(run_criterion(id, seed));
  return out;
}

}  // namespace poisson::regression
