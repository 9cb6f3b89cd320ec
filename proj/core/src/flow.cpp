#include "poisson/flow.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <vector>

namespace poisson {

namespace ode = boost::numeric::odeint;

Vec flow(const FieldFn& field, const Vec& x0, double t, const FlowOptions& options) {
  if (t == 0.0) return x0;
  const std::size_t n = static_cast<std::size_t>(x0.size());
  using State = std::vector<double>;
  State x(x0.data(), x0.data() + n);
  std::size_t calls = 0;
  auto rhs = [&](const State& s, State& ds, double) {
    if (++calls > 13 * options.max_steps) throw FlowError("flow: step budget exhausted");
    const Eigen::Map<const Vec> sv(s.data(), n);
    if (!sv.allFinite()) throw FlowError("flow: non-finite state");
    if ((sv - x0).lpNorm<Eigen::Infinity>() > options.max_excursion) throw FlowError("flow: left the working box");
    const Vec v = field(sv);
    if (!v.allFinite()) throw FlowError("flow: non-finite field value");
    std::copy(v.data(), v.data() + n, ds.begin());
  };
  auto stepper = ode::make_controlled(options.abs_tol, options.rel_tol, ode::runge_kutta_fehlberg78<State>());
  ode::integrate_adaptive(stepper, rhs, x, 0.0, t, t);
  Vec out = Eigen::Map<const Vec>(x.data(), n);
  if (!out.allFinite()) throw FlowError("flow: non-finite result");
  return out;
}

CompiledField::CompiledField(const VectorField& x) {
  for (const auto& c : x.components) {
    components_.emplace_back(c);
    std::vector<CompiledExpr> row;
    for (std::size_t j = 0; j < x.components.size(); ++j) row.emplace_back(c.derivative(j));
    derivatives_.push_back(std::move(row));
  }
}

Vec CompiledField::operator()(const Vec& x) const {
  const std::span<const double> xs(x.data(), x.size());
  Vec v(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) v[k] = components_[k](xs);
  return v;
}

Mat CompiledField::jacobian(const Vec& x) const {
  const std::span<const double> xs(x.data(), x.size());
  Mat j(components_.size(), components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k)
    for (std::size_t l = 0; l < components_.size(); ++l) j(k, l) = derivatives_[k][l](xs);
  return j;
}

Point flow(const VectorField& x, const Point& m, double t, const FlowOptions& options) {
  if (!same_chart(x.chart, m.chart)) throw ChartMismatch();
  const CompiledField f(x);
  const Vec y = flow([&](const Vec& s) { return f(s); }, Eigen::Map<const Vec>(m.values.data(), m.size()), t, options);
  return Point(m.chart, std::vector<double>(y.data(), y.data() + y.size()));
}

}  // namespace poisson
