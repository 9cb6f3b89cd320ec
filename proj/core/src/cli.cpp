#include "poisson/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <map>

#include "poisson/model.hpp"
#include "poisson/normalform.hpp"
#include "poisson/regression.hpp"
#include "poisson/split.hpp"

namespace poisson::cli {

namespace {

using Json = Report::Json;

Json point_json(const Point& p) {
  return Report::vec(Eigen::Map<const Vec>(p.values.data(), static_cast<Index>(p.values.size())));
}

FunctionFamily requested_family(const Model& m, const Request& r) {
  if (r.functions.empty()) {
    if (m.system.empty()) throw Error("model declares no system; pass --functions");
    return m.system_family();
  }
  return m.family(r.functions);
}

Point require_point(const Model& m, const Request& r) {
  if (r.point.empty()) throw Error(r.command + " requires --point");
  return m.point(r.point);
}

Json chart_json(const NumericChart& ch) {
  const auto& d = ch.diagnostics;
  return {{"coordinates", ch.coordinate_names()},
          {"center", point_json(ch.center())},
          {"r", ch.r()},
          {"s", ch.s()},
          {"box", Report::num(ch.box)},
          {"center_z_block", Report::mat(ch.center_z_block())},
          {"diagnostics",
           {{"grid_points", d.grid_points},
            {"half_width", Report::num(d.half_width)},
            {"pp", Report::num(d.pp)},
            {"pq", Report::num(d.pq)},
            {"qq", Report::num(d.qq)},
            {"pz", Report::num(d.pz)},
            {"qz", Report::num(d.qz)},
            {"dg_dp", Report::num(d.dg_dp)},
            {"dg_dq", Report::num(d.dg_dq)},
            {"roundtrip", Report::num(d.roundtrip)},
            {"max_residual", Report::num(d.max_residual)},
            {"center_z_norm", Report::num(d.center_z_norm)},
            {"rank_at_center", d.rank_at_center}}}};
}

Json invariant_json(const TransversalInvariant& t) {
  Json singular = Json::array();
  for (const auto& s : t.singular)
    singular.push_back({{"coordinates", Report::vec(Eigen::Map<const Vec>(s.coordinates.data(),
                                                                          static_cast<Index>(s.coordinates.size())))},
                        {"rank", s.rank},
                        {"misalignment", Report::num(s.misalignment)}});
  return {{"transversal", t.transversal},
          {"generic_rank", t.generic_rank},
          {"tangency", to_string(t.tangency)},
          {"singular", singular}};
}

Json split_check_json(const SplitCheck& c) {
  return {{"split", c.split},
          {"form", c.form},
          {"spans", c.spans},
          {"generators", c.generators},
          {"form_residual", Report::num(c.form_residual)},
          {"span_residual", Report::num(c.span_residual)}};
}

// ---------------------------------------------------------------- commands

void check_jacobi(const Model& m, const Request&, std::uint64_t, Report& rep) {
  const auto terms = jacobiator(m.pi);
  Json nonzero = Json::array();
  for (const auto& t : terms)
    if (!t.value.is_zero())
      nonzero.push_back({{"coordinates", {m.chart->name(t.i), m.chart->name(t.j), m.chart->name(t.k)}},
                         {"value", t.value.str()}});
  rep.verdict("jacobi", nonzero.empty());
  rep.residual("jacobiator_terms", static_cast<int>(terms.size()));
  if (!nonzero.empty()) rep.witness("nonzero_jacobiator", nonzero);
}

void check_involutive(const Model& m, const Request& r, std::uint64_t, Report& rep) {
  const FunctionFamily f = requested_family(m, r);
  const auto res = is_involutive(m.pi, f);
  rep.verdict("involutive", res.involutive);
  Json functions = Json::array();
  for (std::size_t i = 0; i < f.size(); ++i) functions.push_back(f[i].str());
  rep.residual("functions", functions);
  if (!res.involutive) {
    Json failures = Json::array();
    for (const auto& x : res.failures) failures.push_back({{"f", f[x.i].str()}, {"g", f[x.j].str()}, {"bracket", x.bracket.str()}});
    rep.witness("nonzero_brackets", failures);
  }
}

void check_integrable(const Model& m, const Request& r, std::uint64_t, Report& rep) {
  const FunctionFamily f = requested_family(m, r);
  const Point p = require_point(m, r);
  const auto res = liouville_check(m.pi, f, {p});
  rep.verdict("integrable", res.liouville);
  rep.residual("liouville", {{"involutive", res.involutive},
                             {"independent", res.independent},
                             {"independence_rank", res.independence_rank},
                             {"n", res.n},
                             {"s", res.s},
                             {"r", res.r},
                             {"rank", res.max_rank}});
}

void check_f_regular(const Model& m, const Request& r, std::uint64_t, Report& rep) {
  const FunctionFamily f = requested_family(m, r);
  const Point p = require_point(m, r);
  const auto res = f_regular_at(m.pi, f, p);
  rep.verdict("f_regular", res.f_regular);
  rep.residual("regularity", {{"intersection_dim", res.intersection_dim},
                              {"intersection_dim_stacked", res.intersection_dim_stacked},
                              {"restricted_rank", res.restricted_rank},
                              {"r_prime", res.r_prime}});
}

void transversal_induce(const Model& m, const Request& r, std::uint64_t, Report& rep) {
  if (r.transversal.empty()) throw Error("transversal-induce requires --transversal");
  const Transversal& t = m.transversal(r.transversal);
  const FunctionFamily f = requested_family(m, r);
  std::vector<Point> points;
  for (const auto& s : r.points) points.push_back(m.point(s));
  if (points.empty()) points.push_back(t.base());
  const auto compat = compatible_transversal_check(m.pi, f, t, points);
  const auto induced = induce(m.pi, t, f, points);
  rep.verdict("compatible", compat.compatible);
  rep.residual("compatibility", {{"r", compat.r},
                                 {"r_prime", compat.r_prime},
                                 {"restricted_ranks", compat.restricted_ranks},
                                 {"leaf_dims", compat.leaf_dims}});
  Json samples = Json::array();
  for (std::size_t i = 0; i < induced.points.size(); ++i)
    samples.push_back({{"point", point_json(induced.points[i])},
                       {"bivector", Report::mat(induced.matrices[i])},
                       {"rank", induced.ranks[i]}});
  Json generators = Json::array();
  for (int g : induced.generators) generators.push_back(f.name(static_cast<std::size_t>(g)));
  rep.witness("induced", {{"transversal", induced.transversal},
                          {"coordinates", induced.coordinates},
                          {"generators", generators},
                          {"samples", samples}});
}

void gauge(const Model& m, const Request& r, std::uint64_t, Report& rep) {
  if (r.two_form.empty()) throw Error("gauge requires --two-form");
  const TwoForm& b = m.two_form(r.two_form);
  const Point p = require_point(m, r);
  const Mat pi = m.pi.matrix(p);
  const Mat g = gauge_transform_at(m.pi, b, p);
  const int before = linalg::skew_rank(pi), after = linalg::skew_rank(g);
  rep.verdict("rank_preserved", before == after);
  rep.residual("antisymmetry", Report::num((g + g.transpose()).norm()));
  rep.residual("rank", {{"before", before}, {"after", after}});
  rep.witness("gauged", {{"point", point_json(p)}, {"bivector", Report::mat(g)}});
}

void normalize(const Model& m, const Request& r, std::uint64_t seed, Report& rep) {
  const Point p = require_point(m, r);
  EquivariantOptions eo;
  eo.seed = seed;
  if (r.split) {
    const FunctionFamily f = requested_family(m, r);
    const GroupAction g = r.group.empty() ? GroupAction::trivial(m.chart) : m.group(r.group);
    const SplitEquivariantChart sc = construct_split_equivariant_chart(m.pi, f, g, p, eo);
    const EquivariantChart& e = sc.equivariant;
    rep.verdict("chart", e.chart.diagnostics.passed);
    rep.verdict("split", sc.check.split);
    rep.verdict("linear_action", e.linear);
    rep.residual("split", split_check_json(sc.check));
    rep.residual("action", {{"action_residual", Report::num(e.action_residual)},
                            {"homomorphism_residual", Report::num(e.homomorphism_residual)}});
    Json pivots = Json::array();
    for (std::size_t i = 0; i < sc.p.size(); ++i) pivots.push_back(sc.p[i].str());
    Json matrices = Json::object();
    for (std::size_t a = 0; a < g.order(); ++a) matrices[g.element(a)] = Report::mat(e.action_matrices[a]);
    rep.witness("chart", chart_json(e.chart));
    rep.witness("p", pivots);
    rep.witness("action_matrices", matrices);
    return;
  }
  if (r.functions.empty()) throw Error("normalize requires --functions");
  const FunctionFamily f = m.family(r.functions);
  if (r.group.empty()) {
    const NumericChart ch = construct_cjl_chart(m.pi, f, p);
    rep.verdict("chart", ch.diagnostics.passed);
    rep.verdict("rank_criterion", ch.diagnostics.rank_criterion);
    rep.witness("chart", chart_json(ch));
    return;
  }
  const GroupAction& g = m.group(r.group);
  const EquivariantChart e = construct_equivariant_chart(m.pi, f, g, p, eo);
  rep.verdict("chart", e.chart.diagnostics.passed);
  rep.verdict("rank_criterion", e.chart.diagnostics.rank_criterion);
  rep.verdict("linear_action", e.linear);
  rep.residual("action", {{"poisson_action", e.poisson_action},
                          {"poisson_residual", Report::num(e.poisson_residual)},
                          {"action_residual", Report::num(e.action_residual)},
                          {"homomorphism_residual", Report::num(e.homomorphism_residual)}});
  Json matrices = Json::object();
  for (std::size_t a = 0; a < g.order(); ++a) matrices[g.element(a)] = Report::mat(e.action_matrices[a]);
  rep.witness("chart", chart_json(e.chart));
  rep.witness("action_matrices", matrices);
}

void split_test_command(const Model& m, const Request& r, std::uint64_t seed, Report& rep) {
  const FunctionFamily f = requested_family(m, r);
  const Point p = require_point(m, r);
  SplitOptions o;
  o.comparison.seed = seed;
  const SplitVerdict v = split_test(m.pi, f, p, o);
  rep.verdict("split_test", v.status != SplitStatus::inconclusive, to_string(v.status));
  rep.residual("r_prime", v.r_prime);
  if (v.check) rep.residual("split_check", split_check_json(*v.check));
  if (v.chart) rep.witness("chart", chart_json(*v.chart));
  if (v.comparison)
    rep.witness("comparison", {{"first", invariant_json(v.comparison->first)},
                               {"second", invariant_json(v.comparison->second)},
                               {"status", to_string(v.comparison->status)}});
  if (!v.transversals.empty()) rep.witness("transversals", v.transversals);
  if (!v.note.empty()) rep.note(v.note);
}

void paper_regression(const Request&, std::uint64_t seed, Report& rep) {
  for (const auto& c : regression::run_all(seed)) {
    const std::string name = "criterion_" + std::to_string(c.id);
    rep.verdict(name, c.pass, c.title + ": " + c.summary);
    Json d = c.details;
    d["limit_seconds"] = c.limit_seconds;
    d["within_limit"] = c.limit_seconds <= 0 || c.seconds < c.limit_seconds;
    rep.residual(name, d);
  }
}

using Handler = void (*)(const Model&, const Request&, std::uint64_t, Report&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"check-jacobi", check_jacobi},       {"check-involutive", check_involutive},
      {"check-integrable", check_integrable}, {"check-f-regular", check_f_regular},
      {"transversal-induce", transversal_induce}, {"gauge", gauge},
      {"normalize", normalize},             {"split-test", split_test_command}};
  return h;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"check-jacobi",       "check-involutive", "check-integrable",
                                             "check-f-regular",    "transversal-induce", "gauge",
                                             "normalize",          "split-test",       "paper-regression"};
  return c;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  const char* env = std::getenv("POISSON_FORMS_SEED");
  if (!env || !*env) return 0;
  std::uint64_t v = 0;
  const std::string_view s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("POISSON_FORMS_SEED is not an unsigned integer");
  return v;
}

Report run(const Request& request) {
  Report rep(request.command, "");
  try {
    const std::uint64_t seed = resolve_seed(request.seed);
    rep.set_seed(seed);
    if (request.command == "paper-regression") {
      paper_regression(request, seed, rep);
      return rep;
    }
    const auto it = handlers().find(request.command);
    if (it == handlers().end()) throw Error("unknown command '" + request.command + "'");
    if (request.model.empty()) throw Error(request.command + " requires a model");
    const Model m = load_model(request.model);
    rep = Report(request.command, m.name);
    rep.set_seed(seed);
    it->second(m, request, seed, rep);
  } catch (const ParseError& e) {
    rep.error("parse", "position " + std::to_string(e.position()), e.what());
  } catch (const PreconditionError& e) {
    rep.error("precondition", e.name(), e.what());
  } catch (const NumericalError& e) {
    rep.error("numerical", "", e.what());
  } catch (const std::exception& e) {
    rep.error("error", "", e.what());
  }
  return rep;
}

}  // namespace poisson::cli
