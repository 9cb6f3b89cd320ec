#include "poisson/systems.hpp"

#include <algorithm>

namespace poisson {

FunctionFamily::FunctionFamily(ChartPtr chart, std::vector<Expr> functions, std::vector<std::string> names)
    : chart_(std::move(chart)), functions_(std::move(functions)), names_(std::move(names)) {
  if (functions_.empty()) throw Error("function family must not be empty");
  for (auto& f : functions_) {
    if (f.is_zero()) f = Expr::zero(chart_);
    if (!same_chart(f.chart(), chart_)) throw ChartMismatch();
  }
  if (names_.empty())
    for (std::size_t i = 0; i < functions_.size(); ++i) names_.push_back("f" + std::to_string(i + 1));
  if (names_.size() != functions_.size()) throw Error("function family: one name per function");
}

Mat FunctionFamily::jacobian(std::span<const double> x) const {
  const std::size_t n = chart_->size();
  Mat j(functions_.size(), n);
  for (std::size_t i = 0; i < functions_.size(); ++i)
    for (std::size_t k = 0; k < n; ++k) j(i, k) = functions_[i].derivative(k).evaluate(x);
  return j;
}

InvolutivityResult is_involutive(const Bivector& pi, const FunctionFamily& f) {
  if (!same_chart(pi.chart(), f.chart())) throw ChartMismatch();
  InvolutivityResult out;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      Expr b = bracket(pi, f[i], f[j]);
      if (!b.is_zero()) {
        out.involutive = false;
        out.failures.push_back({i, j, std::move(b)});
      }
    }
  return out;
}

int independence_rank_at(const FunctionFamily& f, const Point& m) { return linalg::rank(f.jacobian(m.span())); }

IntegrabilityReport liouville_check(const Bivector& pi, const FunctionFamily& f, const std::vector<Point>& sample) {
  IntegrabilityReport rep;
  rep.n = static_cast<int>(pi.dim());
  rep.s = static_cast<int>(f.size());
  const auto inv = is_involutive(pi, f);
  rep.involutive = inv.involutive;
  rep.failures = inv.failures;
  rep.independence_rank = rep.s;
  for (const auto& m : sample) {
    rep.independence_rank = std::min(rep.independence_rank, independence_rank_at(f, m));
    rep.max_rank = std::max(rep.max_rank, rank_at(pi, m));
  }
  rep.independent = !sample.empty() && rep.independence_rank == rep.s;
  rep.r = rep.max_rank / 2;
  rep.liouville = rep.involutive && rep.independent && rep.r + rep.s == rep.n;
  return rep;
}

Mat foliation_tangent_at(const FunctionFamily& f, const Point& m) {
  const Mat j = f.jacobian(m.span());
  if (linalg::rank(j) < static_cast<int>(f.size()))
    throw PreconditionError("regular-point", "differentials of the family are dependent at this point");
  return linalg::kernel(j);
}

}  // namespace poisson
