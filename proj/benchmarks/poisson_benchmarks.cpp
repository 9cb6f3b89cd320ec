#include <benchmark/benchmark.h>

#include "poisson/flow.hpp"
#include "poisson/model.hpp"
#include "poisson/normalform.hpp"
#include "poisson/regression.hpp"

namespace {

using namespace poisson;

void BM_BracketRandom(benchmark::State& state) {
  const Model m = load_model("builtin:so3");
  std::mt19937_64 rng(1);
  std::vector<Expr> fs;
  for (int i = 0; i < 64; ++i) fs.push_back(regression::random_expression(rng, m.chart, static_cast<int>(state.range(0))));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bracket(m.pi, fs[i % 64], fs[(i + 1) % 64]));
    ++i;
  }
}
BENCHMARK(BM_BracketRandom)->Arg(1)->Arg(3)->Arg(6);

void BM_Jacobiator(benchmark::State& state) {
  const Model m = load_model("builtin:first");
  for (auto _ : state) benchmark::DoNotOptimize(jacobiator(static_cast<const Bivector&>(m.pi)));
}
BENCHMARK(BM_Jacobiator);

void BM_HamiltonianFlow(benchmark::State& state) {
  const Model m = load_model("builtin:second");
  const VectorField x = hamiltonian_vf(m.pi, m.function("f2"));
  const Point p = m.point("0.1, 0.2, 0.3, 0.4");
  const double t = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(flow(x, p, t));
}
BENCHMARK(BM_HamiltonianFlow)->Arg(1)->Arg(10);

void BM_CjlChart(benchmark::State& state) {
  const Model m = load_model("builtin:second");
  ChartOptions o;
  o.verify = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(construct_cjl_chart(m.pi, m.family({"x"}), m.point("origin"), o));
}
BENCHMARK(BM_CjlChart)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ChartForwardInverse(benchmark::State& state) {
  const Model m = load_model("builtin:so3");
  ChartOptions o;
  o.verify = false;
  const NumericChart ch = construct_cjl_chart(m.pi, m.family({"z"}), m.point("e1"), o);
  Vec u(3);
  u << 0.05, -0.03, 0.02;
  for (auto _ : state) benchmark::DoNotOptimize(ch.inverse(ch.forward(u)));
}
BENCHMARK(BM_ChartForwardInverse);

void BM_ChartBracketMatrix(benchmark::State& state) {
  const Model m = load_model("builtin:second");
  ChartOptions o;
  o.verify = false;
  const NumericChart ch = construct_cjl_chart(m.pi, m.family({"x"}), m.point("origin"), o);
  const Vec u = Vec::Constant(4, 0.03);
  for (auto _ : state) benchmark::DoNotOptimize(ch.bracket_matrix(m.pi, u));
}
BENCHMARK(BM_ChartBracketMatrix);

}  // namespace

BENCHMARK_MAIN();
