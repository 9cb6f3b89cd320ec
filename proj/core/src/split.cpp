#include "poisson/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace poisson {

namespace {

Vec to_vec(const Point& m) { return Eigen::Map<const Vec>(m.values.data(), m.size()); }

struct AffineImpl : NumericChart::Impl {
  Vec c;
  Mat a, a_inverse, z_block;
  Vec forward(const Vec& u) const override { return c + a * u; }
  Vec inverse(const Vec& x) const override { return a_inverse * (x - c); }
  Mat center_z_block() const override { return z_block; }
};

}  // namespace

NumericChart affine_chart(const Bivector& pi, const Point& center, int r, const Mat& a) {
  const Index n = static_cast<Index>(pi.dim());
  if (a.rows() != n || a.cols() != n) throw Error("affine_chart: matrix must be square of the chart dimension");
  Eigen::FullPivLU<Mat> lu(a);
  if (!lu.isInvertible()) throw NumericalError("affine_chart: singular matrix");
  auto impl = std::make_shared<AffineImpl>();
  impl->c = to_vec(center);
  impl->a = a;
  impl->a_inverse = lu.inverse();
  const Mat b = impl->a_inverse * pi.matrix(center) * impl->a_inverse.transpose();
  impl->z_block = b.bottomRightCorner(n - 2 * r, n - 2 * r);
  NumericChart chart(center, r, impl);
  chart.box = 1e300;
  return chart;
}

NumericChart coordinate_chart(const Bivector& pi, const Point& center, const std::vector<std::string>& order,
                              int r) {
  const std::size_t n = pi.dim();
  if (order.size() != n) throw Error("coordinate_chart: one name per coordinate");
  Mat a = Mat::Zero(n, n);
  for (std::size_t k = 0; k < n; ++k) a(pi.chart()->index(order[k]), k) = 1.0;
  return affine_chart(pi, center, r, a);
}

SplitCheck verify_split_chart(const Bivector& pi, const FunctionFamily& f, const NumericChart& chart,
                              const VerifyOptions& options) {
  SplitCheck out;
  out.diagnostics = verify_chart(pi, chart, options);
  out.form_residual = out.diagnostics.max_residual;
  out.form = out.form_residual <= options.tolerance;

  const int n = static_cast<int>(chart.dim());
  const int r = chart.r();
  out.generators = static_cast<int>(f.size()) - r;
  if (out.generators < 0 || out.generators > chart.s())
    throw PreconditionError("split", "number of generators does not fit the chart");
  std::vector<int> rows;
  for (int i = 0; i < r; ++i) rows.push_back(2 * i);
  for (int k = 0; k < out.generators; ++k) rows.push_back(2 * r + k);

  const int axes = std::min(n, 4);
  const int per = options.points_per_axis;
  const double step = per > 1 ? 2 * options.half_width / (per - 1) : 0.0;
  int total = 1;
  for (int a = 0; a < axes; ++a) total *= per;
  for (int k = 0; k < total; ++k) {
    Vec u = Vec::Zero(n);
    int rem = k;
    for (int a = 0; a < axes; ++a) {
      u[a] = -options.half_width + (rem % per) * step;
      rem /= per;
    }
    const Vec x = chart.forward(u);
    const Mat j = linalg::fd_jacobian([&](const Vec& v) { return chart.forward(v); }, u, options.fd_step);
    const Mat differentials = j.inverse();
    Mat gens(rows.size(), n);
    for (std::size_t i = 0; i < rows.size(); ++i) gens.row(i) = differentials.row(rows[i]);
    const Mat df = f.jacobian(std::span<const double>(x.data(), x.size()));
    const auto qr = gens.transpose().colPivHouseholderQr();
    for (Index i = 0; i < df.rows(); ++i) {
      const Vec row = df.row(i).transpose();
      const double norm = row.norm();
      if (norm == 0.0) continue;
      const Vec fit = gens.transpose() * qr.solve(row);
      out.span_residual = std::max(out.span_residual, (row - fit).norm() / norm);
    }
  }
  out.spans = out.span_residual <= options.tolerance;
  out.split = out.form && out.spans;
  return out;
}

SplitVerdict split_test(const Bivector& pi, const FunctionFamily& f, const Point& s, const SplitOptions& options) {
  const RegularityReport reg = f_regular_at(pi, f, s);
  if (!reg.f_regular) throw PreconditionError("f-regular", "the system is not F-regular at this point");
  SplitVerdict v;
  v.r_prime = reg.r_prime;
  const int k = static_cast<int>(f.size()) - reg.r_prime;

  const CompatibleTransversal t1 = build_compatible_transversal(pi, f, s, options.first_offset, {}, "T0");
  std::vector<Expr> p;
  std::vector<std::string> names;
  for (int i : t1.pivots) {
    p.push_back(f[i]);
    names.push_back(f.name(i));
  }

  // (1) foliated splitting chart seeded with the pivot functions
  if (!p.empty()) {
    try {
      NumericChart chart = construct_cjl_chart(pi, FunctionFamily(f.chart(), p, names), s, options.chart);
      chart = foliate_chart(chart, f, k);
      SplitCheck check = verify_split_chart(pi, f, chart);
      if (check.split) {
        v.status = SplitStatus::split_witness;
        v.chart = chart;
        v.check = check;
        v.note = "foliated splitting chart verified on a grid";
        return v;
      }
      v.check = check;
    } catch (const PreconditionError& e) {
      v.note = std::string("no split chart: ") + e.what();
    } catch (const NumericalError& e) {
      v.note = std::string("no split chart: ") + e.what();
    }
  }

  // (2) compare two transversals of the T_AB family
  std::vector<double> a2 = options.second_offset;
  if (a2.empty()) {
    a2.assign(reg.r_prime, 0.0);
    if (!a2.empty()) a2[0] = 1.0;
  }
  if (!a2.empty()) {
    const CompatibleTransversal t2 = build_compatible_transversal(pi, f, s, a2, {}, "T1");
    v.transversals = {t1.transversal.name(), t2.transversal.name()};
    v.comparison = compare_transversals(pi, f, t1.transversal, t2.transversal, options.comparison);
    if (v.comparison->status == SplitStatus::unsplit_witness) {
      v.status = SplitStatus::unsplit_witness;
      v.note = "induced systems on two compatible transversals differ";
      return v;
    }
  }
  v.status = SplitStatus::inconclusive;
  if (v.note.empty()) v.note = "no split chart found and the transversal invariants agree";
  return v;
}

SplitEquivariantChart construct_split_equivariant_chart(const Bivector& pi, const FunctionFamily& f,
                                                        const GroupAction& g, const Point& m,
                                                        const EquivariantOptions& options) {
  const std::size_t n = pi.dim();
  const Vec mv = to_vec(m);

  // points of the leaf through m
  std::vector<Vec> leaf{mv};
  for (std::size_t i = 0; i < n; ++i) {
    const CompiledField x(hamiltonian_vf(pi, Expr::variable(pi.chart(), i)));
    for (double t : {-0.05, 0.05}) leaf.push_back(flow([&](const Vec& y) { return x(y); }, mv, t));
  }
  for (const auto& map : g.maps())
    for (const auto& y : leaf)
      if ((map.apply(std::span<const double>(y.data(), y.size())) - y).lpNorm<Eigen::Infinity>() > 1e-9)
        throw PreconditionError("fixed-leaf", "the group does not fix the symplectic leaf pointwise");

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uni(-0.1, 0.1);
  for (int k = 0; k < 10; ++k) {
    Vec x = mv;
    for (Index i = 0; i < x.size(); ++i) x[i] += uni(rng);
    const std::span<const double> xs(x.data(), x.size());
    const Mat df = f.jacobian(xs);
    const auto qr = df.transpose().colPivHouseholderQr();
    for (const auto& map : g.maps()) {
      const Vec y = map.apply(xs);
      const Mat pulled = f.jacobian(std::span<const double>(y.data(), y.size())) * map.jacobian(xs);
      for (Index i = 0; i < pulled.rows(); ++i) {
        const Vec row = pulled.row(i).transpose();
        if ((row - df.transpose() * qr.solve(row)).norm() > 1e-8 * std::max(1.0, row.norm()))
          throw PreconditionError("invariant-foliation", "the group does not preserve the foliation");
      }
    }
  }

  const CompatibleTransversal t = build_compatible_transversal(pi, f, m);
  std::vector<Expr> p;
  std::vector<std::string> names;
  for (int i : t.pivots) {
    p.push_back(is_invariant(g, f[i]) ? f[i] : haar_average(g, f[i]));
    names.push_back(f.name(i));
  }
  SplitEquivariantChart out;
  out.p = FunctionFamily(f.chart(), p, names);
  EquivariantOptions inner = options;
  inner.chart.verify = false;
  const EquivariantChart eq = construct_equivariant_chart(pi, out.p, g, m, inner);
  const int k = static_cast<int>(f.size()) - static_cast<int>(p.size());
  out.equivariant = linearize_action(pi, foliate_chart(eq.chart, f, k), g, options);
  out.equivariant.poisson_action = eq.poisson_action;
  out.equivariant.poisson_residual = eq.poisson_residual;
  out.equivariant.invariant_functions = eq.invariant_functions;
  out.check = verify_split_chart(pi, f, out.equivariant.chart);
  if (!out.check.split) throw PreconditionError("split", "no split chart: the system is not split at this point");
  return out;
}

}  // namespace poisson
